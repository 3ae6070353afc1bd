#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ntf/cp.hpp"
#include "ntf/tensor.hpp"
#include "ntf/tucker.hpp"

namespace ntf {

/// Mode-n matricization. Row i_n holds the mode-n fiber values; the column
/// index enumerates the remaining modes in ascending order with the last
/// mode fastest. refold(unfold(t, n), t.shape()) == t exactly.
struct UnfoldedView {
    Matrix matrix;
    std::size_t mode = 0;
};

UnfoldedView unfold(const DenseTensor& t, std::size_t mode);
DenseTensor refold(const UnfoldedView& u, std::span<const std::size_t> shape);

/// Columnwise Kronecker product of the given matrices (shared column count).
/// Row ordering follows the unfold convention: the first matrix varies
/// slowest, the last fastest, so unfold(T, n).matrix * khatri_rao(off-mode
/// factors in ascending mode order) reproduces cp_contract(T, ..., n).
Matrix khatri_rao(std::span<const Matrix> mats);

/// Classical unfolding-based multiplicative-update baseline. The update
/// algebra is identical to the contraction-only solvers; only the kernels
/// differ: numerators and denominators come from explicit matricizations,
/// Khatri-Rao products (CP), and materialized partial reconstructions
/// (Tucker), each rebuilt on use.
CpFactors mu_unfold_cp_sweep(const CpFactors& f, const DenseTensor& x, const BetaParam& p,
                             double eps);
CpFitResult mu_unfold_cp_fit(const DenseTensor& x, CpFactors init, const FitConfig& cfg);

TuckerModel mu_unfold_tucker_sweep(const TuckerModel& m, const DenseTensor& x, const BetaParam& p,
                                   double eps);
TuckerFitResult mu_unfold_tucker_fit(const DenseTensor& x, TuckerModel init, const FitConfig& cfg);

}  // namespace ntf
