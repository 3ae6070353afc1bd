#pragma once

#include <cstddef>
#include <vector>

#include "ntf/config.hpp"
#include "ntf/divergence.hpp"
#include "ntf/tensor.hpp"

namespace ntf {

/// Tucker parameter block: core of shape (J_1,...,J_N) plus one I_n x J_n
/// factor matrix per mode.
struct TuckerModel {
    DenseTensor core;
    std::vector<Matrix> factors;

    TuckerModel() = default;
    TuckerModel(DenseTensor core, std::vector<Matrix> factors);

    std::size_t order() const { return factors.size(); }
    std::vector<std::size_t> dims() const;
    const std::vector<std::size_t>& ranks() const { return core.shape(); }
};

struct TuckerFitResult {
    TuckerModel model;
    std::vector<TraceRecord> trace;
};

DenseTensor tucker_reconstruct(const TuckerModel& m);

// ---- block multiplicative updates -------------------------------------------

/// Core update: P and Q contracted against every factor give the core-shaped
/// numerator and denominator; the core moves multiplicatively with the eps
/// floor. Never increases the objective.
TuckerModel block_core_update(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                              double eps);
TuckerModel block_core_update_anchored(const TuckerModel& m, const DenseTensor& anchor_core,
                                       const DenseTensor& x, const BetaParam& p, double eps);

/// Factor update for one mode; numerator and denominator come from the fused
/// contraction of P / Q with the core and the off-mode factors.
TuckerModel block_factor_update(const TuckerModel& m, std::size_t mode, const DenseTensor& x,
                                const BetaParam& p, double eps);
TuckerModel block_factor_update_anchored(const TuckerModel& m, std::size_t mode,
                                         const Matrix& anchor, const DenseTensor& x,
                                         const BetaParam& p, double eps);

/// One outer cycle: core first, then factors in ascending mode order.
TuckerModel tucker_bcomm_sweep(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                               double eps);

TuckerFitResult tucker_bcomm_fit(const DenseTensor& x, TuckerModel init, const FitConfig& cfg);

// ---- joint-MM ----------------------------------------------------------------

struct JcommTuckerReference {
    TuckerModel ref;
    DenseTensor p;
    DenseTensor q;
};

JcommTuckerReference make_jcomm_tucker_reference(const TuckerModel& ref, const DenseTensor& x,
                                                 const BetaParam& p, double eps);

/// Inner core update: cached P/Q contracted against the chi-transformed
/// factors of the current inner iterate, anchored at the reference core.
TuckerModel jcomm_inner_core_update(const TuckerModel& current, const JcommTuckerReference& ctx,
                                    const BetaParam& p, double eps);

/// Inner factor update for one mode, using the chi-transformed core and
/// off-mode factors of the current inner iterate, anchored at the reference.
TuckerModel jcomm_inner_factor_update(const TuckerModel& current, const JcommTuckerReference& ctx,
                                      std::size_t mode, const BetaParam& p, double eps);

/// One outer step: reference fixed at `m`, P/Q built once, `inner_steps`
/// sweeps of (core, factors 0..N-1) inner updates. The objective never
/// increases across the call.
TuckerModel jcomm_tucker_outer_step(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                                    std::size_t inner_steps, double eps);

TuckerFitResult tucker_jcomm_fit(const DenseTensor& x, TuckerModel init, const FitConfig& cfg);

// ---- extrapolation -----------------------------------------------------------

/// Same scheme as the CP ExtrapolationState; block 0 is the core and block
/// n+1 is factor n.
struct TuckerExtrapolationState {
    TuckerModel previous;
    double t = 1.0;
    double alpha = 0.0;
    double cap = 1.0;
    double delta = 1e-6;
    double eps = 1e-12;
    bool enabled = false;
};

TuckerExtrapolationState make_tucker_extrapolation_state(const TuckerModel& initial, bool enabled,
                                                         double cap, double delta, double eps);
void extrapolation_begin_iteration(TuckerExtrapolationState& st, const TuckerModel& current);
DenseTensor extrapolate_core(const DenseTensor& current, const TuckerExtrapolationState& st);
Matrix extrapolate_block(const Matrix& current, const TuckerExtrapolationState& st,
                         std::size_t mode);
void extrapolation_end_iteration(TuckerExtrapolationState& st, const TuckerModel& iterate);

}  // namespace ntf
