#include "ntf/unfold.hpp"

#include <algorithm>
#include <utility>

#include "fit_common.hpp"
#include "kernels.hpp"

namespace ntf {

UnfoldedView unfold(const DenseTensor& t, std::size_t mode) {
    if (mode >= t.order()) throw ShapeError("unfold: mode out of range");
    const std::size_t rows = t.dim(mode);
    const std::size_t cols = t.size() / rows;

    // Column strides over the remaining modes, ascending order, last fastest.
    std::vector<std::size_t> col_stride(t.order(), 0);
    std::size_t stride = 1;
    for (std::size_t a = t.order(); a-- > 0;) {
        if (a == mode) continue;
        col_stride[a] = stride;
        stride *= t.dim(a);
    }

    Matrix m(rows, cols);
    MultiIndex idx(t.order(), 0);
    std::size_t flat = 0;
    do {
        std::size_t c = 0;
        for (std::size_t a = 0; a < t.order(); ++a)
            if (a != mode) c += idx[a] * col_stride[a];
        m(idx[mode], c) = t[flat];
        ++flat;
    } while (next_multi_index(idx, t.shape()));
    return {std::move(m), mode};
}

DenseTensor refold(const UnfoldedView& u, std::span<const std::size_t> shape) {
    if (u.mode >= shape.size()) throw ShapeError("refold: mode out of range");
    DenseTensor t(std::vector<std::size_t>(shape.begin(), shape.end()));
    if (u.matrix.rows() != t.dim(u.mode) || u.matrix.size() != t.size())
        throw ShapeError("refold: matrix does not match target shape");

    std::vector<std::size_t> col_stride(t.order(), 0);
    std::size_t stride = 1;
    for (std::size_t a = t.order(); a-- > 0;) {
        if (a == u.mode) continue;
        col_stride[a] = stride;
        stride *= t.dim(a);
    }

    MultiIndex idx(t.order(), 0);
    std::size_t flat = 0;
    do {
        std::size_t c = 0;
        for (std::size_t a = 0; a < t.order(); ++a)
            if (a != u.mode) c += idx[a] * col_stride[a];
        t[flat] = u.matrix(idx[u.mode], c);
        ++flat;
    } while (next_multi_index(idx, t.shape()));
    return t;
}

Matrix khatri_rao(std::span<const Matrix> mats) {
    if (mats.empty()) throw ShapeError("khatri_rao: at least one matrix required");
    const std::size_t r = mats.front().cols();
    for (const Matrix& m : mats)
        if (m.cols() != r) throw ShapeError("khatri_rao: inconsistent column counts");

    Matrix out = mats.front();
    for (std::size_t k = 1; k < mats.size(); ++k) {
        const Matrix& b = mats[k];
        Matrix next(out.rows() * b.rows(), r);
        for (std::size_t ia = 0; ia < out.rows(); ++ia) {
            const double* arow = out.row(ia);
            for (std::size_t ib = 0; ib < b.rows(); ++ib) {
                const double* brow = b.row(ib);
                double* dst = next.row(ia * b.rows() + ib);
                for (std::size_t c = 0; c < r; ++c) dst[c] = arow[c] * brow[c];
            }
        }
        out = std::move(next);
    }
    return out;
}

namespace {

// P and Q in the unfolded layout of xn/xhatn.
std::pair<Matrix, Matrix> unfolded_weights(const Matrix& xn, const Matrix& xhatn, double beta,
                                           double eps) {
    Matrix p(xn.rows(), xn.cols());
    Matrix q(xn.rows(), xn.cols());
    detail::weight_entries(xn.values().data(), xhatn.values().data(), xn.size(), beta, eps,
                           p.values().data(), q.values().data());
    return {std::move(p), std::move(q)};
}

// Mode product computed the classical way: unfold, multiply, refold.
DenseTensor mode_product_unfolded(const DenseTensor& t, const Matrix& m, std::size_t mode) {
    UnfoldedView u = unfold(t, mode);
    std::vector<std::size_t> shape = t.shape();
    shape[mode] = m.rows();
    return refold({matmul(m, u.matrix), mode}, shape);
}

}  // namespace

CpFactors mu_unfold_cp_sweep(const CpFactors& f, const DenseTensor& x, const BetaParam& p,
                             double eps) {
    CpFactors g = f;
    if (g.order() == 1) {
        // no off-mode factors to matricize against; the numerator and
        // denominator are the weights themselves, one column per component
        const DenseTensor xhat = cp_reconstruct(g);
        const auto [pt, qt] = weights(x, xhat, p, eps);
        Matrix num(x.size(), g.rank());
        Matrix den(x.size(), g.rank());
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t r = 0; r < g.rank(); ++r) {
                num(i, r) = pt[i];
                den(i, r) = qt[i];
            }
        }
        g.factors[0] = multiplicative_update(g.factors[0], num, den, p.gamma(), eps);
        return g;
    }
    std::vector<Matrix> off;
    for (std::size_t n = 0; n < g.order(); ++n) {
        off.clear();
        for (std::size_t m = 0; m < g.order(); ++m)
            if (m != n) off.push_back(g.factors[m]);

        // Kernels on purpose via matricization: the Khatri-Rao product and
        // the unfolded reconstruction are materialized in full on every use.
        const Matrix kr = khatri_rao(off);
        const Matrix xn = unfold(x, n).matrix;
        const Matrix xhatn = matmul(g.factors[n], transpose(kr));
        const auto [pn, qn] = unfolded_weights(xn, xhatn, p.beta(), eps);
        const Matrix num = matmul(pn, kr);
        const Matrix den = matmul(qn, kr);
        g.factors[n] = multiplicative_update(g.factors[n], num, den, p.gamma(), eps);
    }
    return g;
}

TuckerModel mu_unfold_tucker_sweep(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                                   double eps) {
    TuckerModel g = m;
    const std::size_t order = g.order();

    // Core update: every mode product goes through an explicit matricization.
    {
        DenseTensor xhat = g.core;
        for (std::size_t k = 0; k < order; ++k)
            xhat = mode_product_unfolded(xhat, g.factors[k], k);
        auto [pc, qc] = weights(x, xhat, p, eps);
        for (std::size_t k = 0; k < order; ++k) {
            const Matrix at = transpose(g.factors[k]);
            pc = mode_product_unfolded(pc, at, k);
            qc = mode_product_unfolded(qc, at, k);
        }
        g.core = multiplicative_update(g.core, pc, qc, p.gamma(), eps);
    }

    // Factor updates: the partial reconstruction over the remaining modes is
    // materialized in full, then one large matrix product per side.
    for (std::size_t n = 0; n < order; ++n) {
        DenseTensor xhat = g.core;
        for (std::size_t k = 0; k < order; ++k)
            xhat = mode_product_unfolded(xhat, g.factors[k], k);
        const auto [pt, qt] = weights(x, xhat, p, eps);
        const Matrix pn = unfold(pt, n).matrix;
        const Matrix qn = unfold(qt, n).matrix;

        DenseTensor partial = g.core;
        for (std::size_t k = 0; k < order; ++k)
            if (k != n) partial = mode_product_unfolded(partial, g.factors[k], k);
        const Matrix bt = transpose(unfold(partial, n).matrix);
        const Matrix num = matmul(pn, bt);
        const Matrix den = matmul(qn, bt);
        g.factors[n] = multiplicative_update(g.factors[n], num, den, p.gamma(), eps);
    }
    return g;
}

CpFitResult mu_unfold_cp_fit(const DenseTensor& x, CpFactors init, const FitConfig& cfg) {
    validate_fit_config(cfg);
    const BetaParam p(cfg.beta);
    auto step = [&](CpFactors& f) { f = mu_unfold_cp_sweep(f, x, p, cfg.eps); };
    auto loss = [&](const CpFactors& f) { return D_beta_mean(x, cp_reconstruct(f), p); };
    CpFitResult out{std::move(init), {}};
    out.trace = detail::run_outer_loop(out.model, cfg, p, step, loss);
    return out;
}

TuckerFitResult mu_unfold_tucker_fit(const DenseTensor& x, TuckerModel init,
                                     const FitConfig& cfg) {
    validate_fit_config(cfg);
    const BetaParam p(cfg.beta);
    auto step = [&](TuckerModel& m) { m = mu_unfold_tucker_sweep(m, x, p, cfg.eps); };
    auto loss = [&](const TuckerModel& m) { return D_beta_mean(x, tucker_reconstruct(m), p); };
    TuckerFitResult out{std::move(init), {}};
    out.trace = detail::run_outer_loop(out.model, cfg, p, step, loss);
    return out;
}

}  // namespace ntf
