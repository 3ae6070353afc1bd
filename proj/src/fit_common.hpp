#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "ntf/config.hpp"
#include "ntf/divergence.hpp"
#include "ntf/errors.hpp"

// Shared outer-loop driver for all fit entry points.
namespace ntf::detail {

inline void check_finite_loss(double loss, const BetaParam& p) {
    if (std::isnan(loss)) throw NumericalError("fit aborted: objective is NaN");
    if (std::isinf(loss)) {
        if (p.beta() == 0.0)
            throw NumericalError(
                "fit aborted: objective is infinite (beta = 0 with zero data entries; "
                "apply a positive data floor, e.g. --data-floor)");
        throw NumericalError("fit aborted: objective is infinite");
    }
}

/// Runs up to cfg.max_iters outer iterations of `step` on `model`, tracing
/// the normalized loss after each one. The clock covers only the solver work
/// inside `step`; loss evaluation is untimed so every algorithm is traced on
/// the same terms. Stops early once |d loss| / (1 + |loss|) < cfg.tol.
template <class Model, class StepFn, class LossFn>
std::vector<TraceRecord> run_outer_loop(Model& model, const FitConfig& cfg, const BetaParam& p,
                                        StepFn&& step, LossFn&& loss_of) {
    using clock = std::chrono::steady_clock;
    std::vector<TraceRecord> trace;
    trace.reserve(cfg.max_iters + 1);

    double loss = loss_of(model);
    check_finite_loss(loss, p);
    trace.push_back({0, 0.0, loss});

    double elapsed = 0.0;
    for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
        const auto t0 = clock::now();
        step(model);
        elapsed += std::chrono::duration<double>(clock::now() - t0).count();

        const double prev = loss;
        loss = loss_of(model);
        check_finite_loss(loss, p);
        trace.push_back({k, elapsed, loss});
        if (std::abs(prev - loss) / (1.0 + std::abs(loss)) < cfg.tol) break;
    }
    return trace;
}

}  // namespace ntf::detail
