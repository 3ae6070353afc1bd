#include "ntf/cp.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fit_common.hpp"

namespace ntf {

CpFactors::CpFactors(std::vector<Matrix> f) : factors(std::move(f)) {
    if (factors.empty()) throw ShapeError("CpFactors: at least one factor required");
    const std::size_t r = factors.front().cols();
    for (const Matrix& m : factors) {
        if (m.cols() != r) throw ShapeError("CpFactors: factors must share a column count");
        if (m.rows() == 0 || r == 0) throw ShapeError("CpFactors: empty factor");
    }
}

std::vector<std::size_t> CpFactors::dims() const {
    std::vector<std::size_t> d(factors.size());
    for (std::size_t n = 0; n < factors.size(); ++n) d[n] = factors[n].rows();
    return d;
}

DenseTensor cp_reconstruct(const CpFactors& f) {
    const std::size_t order = f.order();
    const std::size_t r = f.rank();
    std::vector<std::size_t> shape = f.dims();

    if (order == 1) {
        DenseTensor out(shape);
        for (std::size_t i = 0; i < out.size(); ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < r; ++k) acc += f.factors[0](i, k);
            out[i] = acc;
        }
        return out;
    }

    // Grow the componentwise outer product one mode at a time, then collapse
    // the component axis against the last factor as a matrix product. Peak
    // intermediate size is |X| * R / I_N.
    std::vector<double> work(f.factors[0].values());
    std::size_t prefix = shape[0];
    for (std::size_t n = 1; n + 1 < order; ++n) {
        const Matrix& a = f.factors[n];
        const std::size_t in = shape[n];
        std::vector<double> next(prefix * in * r);
        for (std::size_t pidx = 0; pidx < prefix; ++pidx) {
            const double* src = work.data() + pidx * r;
            for (std::size_t i = 0; i < in; ++i) {
                const double* arow = a.row(i);
                double* dst = next.data() + (pidx * in + i) * r;
                for (std::size_t k = 0; k < r; ++k) dst[k] = src[k] * arow[k];
            }
        }
        work = std::move(next);
        prefix *= in;
    }

    const Matrix& last = f.factors[order - 1];
    const std::size_t in = shape[order - 1];
    DenseTensor out(std::move(shape));
    for (std::size_t pidx = 0; pidx < prefix; ++pidx) {
        const double* src = work.data() + pidx * r;
        double* dst = out.data() + pidx * in;
        for (std::size_t i = 0; i < in; ++i) {
            const double* arow = last.row(i);
            double acc = 0.0;
            for (std::size_t k = 0; k < r; ++k) acc += src[k] * arow[k];
            dst[i] = acc;
        }
    }
    return out;
}

namespace {

void require_dims_match(const CpFactors& f, const DenseTensor& x, const char* op) {
    if (f.order() != x.order()) throw ShapeError(std::string(op) + ": order mismatch");
    for (std::size_t n = 0; n < f.order(); ++n)
        if (f.factors[n].rows() != x.dim(n))
            throw ShapeError(std::string(op) + ": factor rows do not match data dimension");
}

// At beta = 1 the denominator weights are identically one, so contracting
// them factorizes into per-mode column sums: Den(i, r) = prod_{m != mode}
// sum_i factors[m](i, r), the same for every row i.
Matrix ones_denominator(std::size_t rows, std::span<const Matrix> factors, std::size_t mode) {
    const std::size_t r = factors[mode].cols();
    std::vector<double> prod(r, 1.0);
    for (std::size_t m = 0; m < factors.size(); ++m) {
        if (m == mode) continue;
        for (std::size_t k = 0; k < r; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < factors[m].rows(); ++i) s += factors[m](i, k);
            prod[k] *= s;
        }
    }
    Matrix out(rows, r);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < r; ++k) out(i, k) = prod[k];
    return out;
}

}  // namespace

CpFactors cp_block_update_anchored(const CpFactors& f, std::size_t mode, const Matrix& anchor,
                                   const DenseTensor& x, const BetaParam& p, double eps) {
    require_dims_match(f, x, "cp_block_update");
    if (mode >= f.order()) throw ShapeError("cp_block_update: mode out of range");

    CpFactors g = f;
    g.factors[mode] = anchor;
    const DenseTensor xhat = cp_reconstruct(g);
    const auto [pt, qt] = weights(x, xhat, p, eps);
    const Matrix num = cp_contract(pt, g.factors, mode);
    const Matrix den = p.beta() == 1.0 ? ones_denominator(x.dim(mode), g.factors, mode)
                                       : cp_contract(qt, g.factors, mode);
    g.factors[mode] = multiplicative_update(anchor, num, den, p.gamma(), eps);
    return g;
}

CpFactors bcomm_block_update(const CpFactors& f, std::size_t mode, const DenseTensor& x,
                             const BetaParam& p, double eps) {
    if (mode >= f.order()) throw ShapeError("bcomm_block_update: mode out of range");
    return cp_block_update_anchored(f, mode, f.factors[mode], x, p, eps);
}

CpFactors bcomm_sweep(const CpFactors& f, const DenseTensor& x, const BetaParam& p, double eps) {
    CpFactors g = f;
    for (std::size_t n = 0; n < g.order(); ++n) g = bcomm_block_update(g, n, x, p, eps);
    return g;
}

// ---- extrapolation -----------------------------------------------------------

namespace {

double positive_part_sq_norm(const std::vector<double>& cur, const std::vector<double>& prev) {
    double acc = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        const double d = cur[i] - prev[i];
        if (d > 0.0) acc += d * d;
    }
    return acc;
}

void extrapolate_values(const double* cur, const double* prev, std::size_t n, double alpha,
                        double eps, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = cur[i] - prev[i];
        out[i] = std::max(cur[i] + alpha * (d > 0.0 ? d : 0.0), eps);
    }
}

double advance_nesterov(double& t) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double alpha = (t - 1.0) / t_next;
    t = t_next;
    return alpha;
}

}  // namespace

ExtrapolationState make_extrapolation_state(const CpFactors& initial, bool enabled, double cap,
                                            double delta, double eps) {
    ExtrapolationState st;
    st.previous = initial;
    st.cap = cap;
    st.delta = delta;
    st.eps = eps;
    st.enabled = enabled;
    return st;
}

void extrapolation_begin_iteration(ExtrapolationState& st, const CpFactors& current) {
    const double alpha_nes = advance_nesterov(st.t);
    double sq = 0.0;
    for (std::size_t n = 0; n < current.order(); ++n)
        sq += positive_part_sq_norm(current.factors[n].values(), st.previous.factors[n].values());
    st.alpha = std::min(alpha_nes, st.cap / (std::sqrt(sq) + st.delta));
}

Matrix extrapolate_block(const Matrix& current, const ExtrapolationState& st, std::size_t block) {
    const Matrix& prev = st.previous.factors[block];
    if (prev.rows() != current.rows() || prev.cols() != current.cols())
        throw ShapeError("extrapolate_block: shape mismatch with recorded iterate");
    Matrix out(current.rows(), current.cols());
    extrapolate_values(current.values().data(), prev.values().data(), current.size(), st.alpha,
                       st.eps, out.values().data());
    return out;
}

void extrapolation_end_iteration(ExtrapolationState& st, const CpFactors& iterate) {
    st.previous = iterate;
}

// ---- joint-MM ----------------------------------------------------------------

JcommCpReference make_jcomm_reference(const CpFactors& ref, const DenseTensor& x,
                                      const BetaParam& p, double eps) {
    require_dims_match(ref, x, "make_jcomm_reference");
    const DenseTensor xhat = cp_reconstruct(ref);
    auto [pt, qt] = weights(x, xhat, p, eps);
    return {ref, std::move(pt), std::move(qt)};
}

CpFactors jcomm_inner_update(const CpFactors& current, const JcommCpReference& ctx,
                             std::size_t mode, const BetaParam& p, double eps) {
    if (mode >= current.order()) throw ShapeError("jcomm_inner_update: mode out of range");
    const std::size_t order = current.order();
    std::vector<Matrix> t1(order);
    std::vector<Matrix> t2(order);
    t1[mode] = current.factors[mode];  // only its column count is consulted
    t2[mode] = current.factors[mode];
    for (std::size_t m = 0; m < order; ++m) {
        if (m == mode) continue;
        t1[m] = chi1(current.factors[m], ctx.ref.factors[m], p);
        t2[m] = chi2(current.factors[m], ctx.ref.factors[m], p);
    }
    const Matrix num = cp_contract(ctx.p, t1, mode);
    const Matrix den = p.beta() == 1.0 ? ones_denominator(ctx.p.dim(mode), t2, mode)
                                       : cp_contract(ctx.q, t2, mode);
    CpFactors out = current;
    out.factors[mode] = multiplicative_update(ctx.ref.factors[mode], num, den, p.gamma(), eps);
    return out;
}

CpFactors jcomm_outer_step(const CpFactors& f, const DenseTensor& x, const BetaParam& p,
                           std::size_t inner_steps, double eps) {
    if (inner_steps < 1) throw DomainError("jcomm_outer_step: inner_steps must be >= 1");
    const JcommCpReference ctx = make_jcomm_reference(f, x, p, eps);
    CpFactors cur = f;
    for (std::size_t l = 0; l < inner_steps; ++l)
        for (std::size_t n = 0; n < cur.order(); ++n)
            cur = jcomm_inner_update(cur, ctx, n, p, eps);
    return cur;
}

// ---- fit drivers ----------------------------------------------------------------

CpFitResult bcomm_fit(const DenseTensor& x, CpFactors init, const FitConfig& cfg) {
    validate_fit_config(cfg);
    const BetaParam p(cfg.beta);
    require_dims_match(init, x, "bcomm_fit");

    ExtrapolationState st =
        make_extrapolation_state(init, cfg.extrapolate, cfg.extrap_cap, cfg.extrap_delta, cfg.eps);
    auto step = [&](CpFactors& f) {
        if (st.enabled) {
            const CpFactors snapshot = f;
            extrapolation_begin_iteration(st, f);
            for (std::size_t n = 0; n < f.order(); ++n) {
                const Matrix anchor = extrapolate_block(f.factors[n], st, n);
                f = cp_block_update_anchored(f, n, anchor, x, p, cfg.eps);
            }
            extrapolation_end_iteration(st, snapshot);
        } else {
            f = bcomm_sweep(f, x, p, cfg.eps);
        }
    };
    auto loss = [&](const CpFactors& f) { return D_beta_mean(x, cp_reconstruct(f), p); };

    CpFitResult out{std::move(init), {}};
    out.trace = detail::run_outer_loop(out.model, cfg, p, step, loss);
    return out;
}

CpFitResult jcomm_fit(const DenseTensor& x, CpFactors init, const FitConfig& cfg) {
    validate_fit_config(cfg);
    const BetaParam p(cfg.beta);
    require_dims_match(init, x, "jcomm_fit");

    ExtrapolationState st =
        make_extrapolation_state(init, cfg.extrapolate, cfg.extrap_cap, cfg.extrap_delta, cfg.eps);
    auto step = [&](CpFactors& f) {
        if (st.enabled) {
            // Inertial step on the outer reference; the inner loop is
            // unchanged and keeps its cached-P/Q structure.
            const CpFactors snapshot = f;
            extrapolation_begin_iteration(st, f);
            CpFactors ref = f;
            for (std::size_t n = 0; n < f.order(); ++n)
                ref.factors[n] = extrapolate_block(f.factors[n], st, n);
            f = jcomm_outer_step(ref, x, p, cfg.inner_steps, cfg.eps);
            extrapolation_end_iteration(st, snapshot);
        } else {
            f = jcomm_outer_step(f, x, p, cfg.inner_steps, cfg.eps);
        }
    };
    auto loss = [&](const CpFactors& f) { return D_beta_mean(x, cp_reconstruct(f), p); };

    CpFitResult out{std::move(init), {}};
    out.trace = detail::run_outer_loop(out.model, cfg, p, step, loss);
    return out;
}

}  // namespace ntf
