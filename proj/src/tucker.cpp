#include "ntf/tucker.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fit_common.hpp"

namespace ntf {

TuckerModel::TuckerModel(DenseTensor c, std::vector<Matrix> f)
    : core(std::move(c)), factors(std::move(f)) {
    if (factors.empty()) throw ShapeError("TuckerModel: at least one factor required");
    if (core.order() != factors.size())
        throw ShapeError("TuckerModel: core order does not match factor count");
    for (std::size_t n = 0; n < factors.size(); ++n)
        if (factors[n].cols() != core.dim(n))
            throw ShapeError("TuckerModel: factor columns do not match core dimension");
}

std::vector<std::size_t> TuckerModel::dims() const {
    std::vector<std::size_t> d(factors.size());
    for (std::size_t n = 0; n < factors.size(); ++n) d[n] = factors[n].rows();
    return d;
}

DenseTensor tucker_reconstruct(const TuckerModel& m) {
    return tucker_reconstruct(m.core, m.factors);
}

namespace {

void require_dims_match(const TuckerModel& m, const DenseTensor& x, const char* op) {
    if (m.order() != x.order()) throw ShapeError(std::string(op) + ": order mismatch");
    for (std::size_t n = 0; n < m.order(); ++n)
        if (m.factors[n].rows() != x.dim(n))
            throw ShapeError(std::string(op) + ": factor rows do not match data dimension");
}

}  // namespace

// ---- block updates ---------------------------------------------------------

TuckerModel block_core_update_anchored(const TuckerModel& m, const DenseTensor& anchor_core,
                                       const DenseTensor& x, const BetaParam& p, double eps) {
    require_dims_match(m, x, "block_core_update");
    TuckerModel g = m;
    g.core = anchor_core;
    const DenseTensor xhat = tucker_reconstruct(g);
    const auto [pt, qt] = weights(x, xhat, p, eps);
    const DenseTensor num = tucker_multimode_contract(pt, g.factors);
    const DenseTensor den = tucker_multimode_contract(qt, g.factors);
    g.core = multiplicative_update(anchor_core, num, den, p.gamma(), eps);
    return g;
}

TuckerModel block_core_update(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                              double eps) {
    return block_core_update_anchored(m, m.core, x, p, eps);
}

TuckerModel block_factor_update_anchored(const TuckerModel& m, std::size_t mode,
                                         const Matrix& anchor, const DenseTensor& x,
                                         const BetaParam& p, double eps) {
    require_dims_match(m, x, "block_factor_update");
    if (mode >= m.order()) throw ShapeError("block_factor_update: mode out of range");
    TuckerModel g = m;
    g.factors[mode] = anchor;
    const DenseTensor xhat = tucker_reconstruct(g);
    const auto [pt, qt] = weights(x, xhat, p, eps);
    const Matrix num = tucker_factor_contract(pt, g.core, g.factors, mode);
    const Matrix den = tucker_factor_contract(qt, g.core, g.factors, mode);
    g.factors[mode] = multiplicative_update(anchor, num, den, p.gamma(), eps);
    return g;
}

TuckerModel block_factor_update(const TuckerModel& m, std::size_t mode, const DenseTensor& x,
                                const BetaParam& p, double eps) {
    if (mode >= m.order()) throw ShapeError("block_factor_update: mode out of range");
    return block_factor_update_anchored(m, mode, m.factors[mode], x, p, eps);
}

TuckerModel tucker_bcomm_sweep(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                               double eps) {
    TuckerModel g = block_core_update(m, x, p, eps);
    for (std::size_t n = 0; n < g.order(); ++n) g = block_factor_update(g, n, x, p, eps);
    return g;
}

// ---- joint-MM ----------------------------------------------------------------

JcommTuckerReference make_jcomm_tucker_reference(const TuckerModel& ref, const DenseTensor& x,
                                                 const BetaParam& p, double eps) {
    require_dims_match(ref, x, "make_jcomm_tucker_reference");
    const DenseTensor xhat = tucker_reconstruct(ref);
    auto [pt, qt] = weights(x, xhat, p, eps);
    return {ref, std::move(pt), std::move(qt)};
}

TuckerModel jcomm_inner_core_update(const TuckerModel& current, const JcommTuckerReference& ctx,
                                    const BetaParam& p, double eps) {
    const std::size_t order = current.order();
    std::vector<Matrix> a1(order);
    std::vector<Matrix> a2(order);
    for (std::size_t m = 0; m < order; ++m) {
        a1[m] = chi1(current.factors[m], ctx.ref.factors[m], p);
        a2[m] = chi2(current.factors[m], ctx.ref.factors[m], p);
    }
    const DenseTensor num = tucker_multimode_contract(ctx.p, a1);
    const DenseTensor den = tucker_multimode_contract(ctx.q, a2);
    TuckerModel out = current;
    out.core = multiplicative_update(ctx.ref.core, num, den, p.gamma(), eps);
    return out;
}

TuckerModel jcomm_inner_factor_update(const TuckerModel& current, const JcommTuckerReference& ctx,
                                      std::size_t mode, const BetaParam& p, double eps) {
    if (mode >= current.order()) throw ShapeError("jcomm_inner_factor_update: mode out of range");
    const std::size_t order = current.order();
    const DenseTensor g1 = chi1(current.core, ctx.ref.core, p);
    const DenseTensor g2 = chi2(current.core, ctx.ref.core, p);
    std::vector<Matrix> t1(order);
    std::vector<Matrix> t2(order);
    t1[mode] = current.factors[mode];
    t2[mode] = current.factors[mode];
    for (std::size_t m = 0; m < order; ++m) {
        if (m == mode) continue;
        t1[m] = chi1(current.factors[m], ctx.ref.factors[m], p);
        t2[m] = chi2(current.factors[m], ctx.ref.factors[m], p);
    }
    const Matrix num = tucker_factor_contract(ctx.p, g1, t1, mode);
    const Matrix den = tucker_factor_contract(ctx.q, g2, t2, mode);
    TuckerModel out = current;
    out.factors[mode] = multiplicative_update(ctx.ref.factors[mode], num, den, p.gamma(), eps);
    return out;
}

TuckerModel jcomm_tucker_outer_step(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                                    std::size_t inner_steps, double eps) {
    if (inner_steps < 1) throw DomainError("jcomm_tucker_outer_step: inner_steps must be >= 1");
    const JcommTuckerReference ctx = make_jcomm_tucker_reference(m, x, p, eps);
    TuckerModel cur = m;
    for (std::size_t l = 0; l < inner_steps; ++l) {
        cur = jcomm_inner_core_update(cur, ctx, p, eps);
        for (std::size_t n = 0; n < cur.order(); ++n)
            cur = jcomm_inner_factor_update(cur, ctx, n, p, eps);
    }
    return cur;
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

}  // namespace

TuckerExtrapolationState make_tucker_extrapolation_state(const TuckerModel& initial, bool enabled,
                                                         double cap, double delta, double eps) {
    TuckerExtrapolationState st;
    st.previous = initial;
    st.cap = cap;
    st.delta = delta;
    st.eps = eps;
    st.enabled = enabled;
    return st;
}

void extrapolation_begin_iteration(TuckerExtrapolationState& st, const TuckerModel& current) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * st.t * st.t));
    const double alpha_nes = (st.t - 1.0) / t_next;
    st.t = t_next;
    double sq = positive_part_sq_norm(current.core.values(), st.previous.core.values());
    for (std::size_t n = 0; n < current.order(); ++n)
        sq += positive_part_sq_norm(current.factors[n].values(), st.previous.factors[n].values());
    st.alpha = std::min(alpha_nes, st.cap / (std::sqrt(sq) + st.delta));
}

DenseTensor extrapolate_core(const DenseTensor& current, const TuckerExtrapolationState& st) {
    if (current.shape() != st.previous.core.shape())
        throw ShapeError("extrapolate_core: shape mismatch with recorded iterate");
    DenseTensor out(current.shape());
    extrapolate_values(current.data(), st.previous.core.data(), current.size(), st.alpha, st.eps,
                       out.data());
    return out;
}

Matrix extrapolate_block(const Matrix& current, const TuckerExtrapolationState& st,
                         std::size_t mode) {
    const Matrix& prev = st.previous.factors[mode];
    if (prev.rows() != current.rows() || prev.cols() != current.cols())
        throw ShapeError("extrapolate_block: shape mismatch with recorded iterate");
    Matrix out(current.rows(), current.cols());
    extrapolate_values(current.values().data(), prev.values().data(), current.size(), st.alpha,
                       st.eps, out.values().data());
    return out;
}

void extrapolation_end_iteration(TuckerExtrapolationState& st, const TuckerModel& iterate) {
    st.previous = iterate;
}

// ---- fit drivers ----------------------------------------------------------------

TuckerFitResult tucker_bcomm_fit(const DenseTensor& x, TuckerModel init, const FitConfig& cfg) {
    validate_fit_config(cfg);
    const BetaParam p(cfg.beta);
    require_dims_match(init, x, "tucker_bcomm_fit");

    TuckerExtrapolationState st = make_tucker_extrapolation_state(
        init, cfg.extrapolate, cfg.extrap_cap, cfg.extrap_delta, cfg.eps);
    auto step = [&](TuckerModel& m) {
        if (st.enabled) {
            const TuckerModel snapshot = m;
            extrapolation_begin_iteration(st, m);
            m = block_core_update_anchored(m, extrapolate_core(m.core, st), x, p, cfg.eps);
            for (std::size_t n = 0; n < m.order(); ++n) {
                const Matrix anchor = extrapolate_block(m.factors[n], st, n);
                m = block_factor_update_anchored(m, n, anchor, x, p, cfg.eps);
            }
            extrapolation_end_iteration(st, snapshot);
        } else {
            m = tucker_bcomm_sweep(m, x, p, cfg.eps);
        }
    };
    auto loss = [&](const TuckerModel& m) { return D_beta_mean(x, tucker_reconstruct(m), p); };

    TuckerFitResult out{std::move(init), {}};
    out.trace = detail::run_outer_loop(out.model, cfg, p, step, loss);
    return out;
}

TuckerFitResult tucker_jcomm_fit(const DenseTensor& x, TuckerModel init, const FitConfig& cfg) {
    validate_fit_config(cfg);
    const BetaParam p(cfg.beta);
    require_dims_match(init, x, "tucker_jcomm_fit");

    TuckerExtrapolationState st = make_tucker_extrapolation_state(
        init, cfg.extrapolate, cfg.extrap_cap, cfg.extrap_delta, cfg.eps);
    auto step = [&](TuckerModel& m) {
        if (st.enabled) {
            const TuckerModel snapshot = m;
            extrapolation_begin_iteration(st, m);
            TuckerModel ref = m;
            ref.core = extrapolate_core(m.core, st);
            for (std::size_t n = 0; n < m.order(); ++n)
                ref.factors[n] = extrapolate_block(m.factors[n], st, n);
            m = jcomm_tucker_outer_step(ref, x, p, cfg.inner_steps, cfg.eps);
            extrapolation_end_iteration(st, snapshot);
        } else {
            m = jcomm_tucker_outer_step(m, x, p, cfg.inner_steps, cfg.eps);
        }
    };
    auto loss = [&](const TuckerModel& m) { return D_beta_mean(x, tucker_reconstruct(m), p); };

    TuckerFitResult out{std::move(init), {}};
    out.trace = detail::run_outer_loop(out.model, cfg, p, step, loss);
    return out;
}

}  // namespace ntf
