#pragma once

#include <cstddef>
#include <vector>

#include "ntf/config.hpp"
#include "ntf/divergence.hpp"
#include "ntf/tensor.hpp"

namespace ntf {

/// CP parameter block: one I_n x R factor matrix per mode, shared rank R.
struct CpFactors {
    std::vector<Matrix> factors;

    CpFactors() = default;
    explicit CpFactors(std::vector<Matrix> f);

    std::size_t order() const { return factors.size(); }
    std::size_t rank() const { return factors.empty() ? 0 : factors.front().cols(); }
    std::vector<std::size_t> dims() const;
};

struct CpFitResult {
    CpFactors model;
    std::vector<TraceRecord> trace;
};

/// Xhat[i] = sum_r prod_n factors[n](i_n, r).
DenseTensor cp_reconstruct(const CpFactors& f);

// ---- block multiplicative updates -------------------------------------------

/// One block update of factor `mode`: rebuilds the reconstruction, forms the
/// P/Q weights, contracts them against the off-mode factors, and applies the
/// multiplicative step with the eps floor. Never increases the objective.
CpFactors bcomm_block_update(const CpFactors& f, std::size_t mode, const DenseTensor& x,
                             const BetaParam& p, double eps);

/// Same update with the multiplicative pre-factor and the reconstruction
/// anchored at `anchor` instead of factors[mode] (extrapolation hook).
CpFactors cp_block_update_anchored(const CpFactors& f, std::size_t mode, const Matrix& anchor,
                                   const DenseTensor& x, const BetaParam& p, double eps);

/// One full cycle over modes 0..N-1.
CpFactors bcomm_sweep(const CpFactors& f, const DenseTensor& x, const BetaParam& p, double eps);

CpFitResult bcomm_fit(const DenseTensor& x, CpFactors init, const FitConfig& cfg);

// ---- joint-MM ----------------------------------------------------------------

/// Reference state cached for a whole inner loop: the reference factors and
/// the reference-powered tensors P, Q built from their reconstruction.
struct JcommCpReference {
    CpFactors ref;
    DenseTensor p;
    DenseTensor q;
};

JcommCpReference make_jcomm_reference(const CpFactors& ref, const DenseTensor& x,
                                      const BetaParam& p, double eps);

/// One inner block update: contracts the cached P/Q against the
/// chi-transformed off-mode factors taken from the current inner iterate, and
/// anchors the multiplicative step at the reference block. This is the exact
/// minimizer of the joint surrogate in that block with the others held fixed.
CpFactors jcomm_inner_update(const CpFactors& current, const JcommCpReference& ctx,
                             std::size_t mode, const BetaParam& p, double eps);

/// One outer step: fixes the reference at `f`, builds P/Q once, then runs
/// `inner_steps` ascending-mode sweeps of inner updates. The objective never
/// increases across the whole call.
CpFactors jcomm_outer_step(const CpFactors& f, const DenseTensor& x, const BetaParam& p,
                           std::size_t inner_steps, double eps);

CpFitResult jcomm_fit(const DenseTensor& x, CpFactors init, const FitConfig& cfg);

// ---- extrapolation -----------------------------------------------------------

/// Inertial-step state for the extrapolated solver variants. One scalar
/// alpha per outer iteration is shared by all blocks:
///   alpha = min(alpha_nesterov, cap / (||[current - previous]_+||_F + delta)),
/// with the Nesterov sequence t_0 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2,
/// alpha_k = (t_k - 1) / t_{k+1}. The constant cap is one admissible choice;
/// any bounded (or slowly decreasing) cap schedule would do. Setting cap = 0
/// pins alpha to 0, which makes every update coincide with the plain solver
/// from that point on.
struct ExtrapolationState {
    CpFactors previous;
    double t = 1.0;
    double alpha = 0.0;
    double cap = 1.0;
    double delta = 1e-6;
    double eps = 1e-12;
    bool enabled = false;
};

ExtrapolationState make_extrapolation_state(const CpFactors& initial, bool enabled, double cap,
                                            double delta, double eps);

/// Advances the Nesterov sequence and recomputes alpha from the displacement
/// between `current` and the stored previous iterate. Call once per outer
/// iteration, before the block updates.
void extrapolation_begin_iteration(ExtrapolationState& st, const CpFactors& current);

/// max(current + alpha * [current - previous]_+, eps), entrywise.
Matrix extrapolate_block(const Matrix& current, const ExtrapolationState& st, std::size_t block);

/// Records `iterate` as the previous outer iterate for the next iteration.
void extrapolation_end_iteration(ExtrapolationState& st, const CpFactors& iterate);

}  // namespace ntf
