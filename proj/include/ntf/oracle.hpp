#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ntf/cp.hpp"
#include "ntf/divergence.hpp"
#include "ntf/tensor.hpp"
#include "ntf/tucker.hpp"

/// Deliberately naive reference implementations: every quantity is evaluated
/// by explicit nested loops over the displayed sums, with no shared code or
/// algebraic shortcuts relative to the production kernels. Complexity is
/// O(|X| * |components|); intended for small test problems only.
namespace ntf::oracle {

DenseTensor brute_cp_reconstruct(const CpFactors& f);
DenseTensor brute_tucker_reconstruct(const DenseTensor& core, std::span<const Matrix> factors);
Matrix brute_cp_contract(const DenseTensor& t, std::span<const Matrix> factors, std::size_t mode);
DenseTensor brute_mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode);
DenseTensor brute_multimode_contract(const DenseTensor& t, std::span<const Matrix> factors);
Matrix brute_tucker_factor_contract(const DenseTensor& t, const DenseTensor& core,
                                    std::span<const Matrix> factors, std::size_t mode);

/// Per-entry, per-component reference weights
///   lambda[i, rho] = z_rho(ref at entry i) / reconstruction(ref at entry i),
/// stored row-major with `components` columns. Rows sum to 1 by construction.
struct ComponentWeights {
    std::size_t components = 0;
    std::vector<double> lambda;  // |X| rows x `components` cols

    double operator()(std::size_t entry, std::size_t rho) const {
        return lambda[entry * components + rho];
    }
};

ComponentWeights cp_component_weights(const CpFactors& ref);
ComponentWeights tucker_component_weights(const TuckerModel& ref);

/// Joint surrogate G(theta | ref) for the CP model, evaluated by explicit
/// loops over entries i and components rho, with every theta-independent
/// constant included so that G(ref | ref) equals D_beta exactly (up to
/// roundoff) and G(theta | ref) >= D_beta(theta) holds as an absolute bound.
///
/// Writing z_rho for the component contributions (sum_rho z_rho = Xhat) and
/// lambda_rho for the reference weights above, the entrywise terms are:
///
///   beta in [1,2):  sum_rho lambda_rho * d_beta(x | z_rho / lambda_rho)
///
///   beta in (0,1):  sum_rho lambda_rho * x/(1-beta) * (z_rho/lambda_rho)^(beta-1)
///                   + (1/beta) * r^beta + r^(beta-1) * (xhat - r)
///                   + x^beta / (beta (beta-1))
///                   where r is the reference reconstruction entry (the last
///                   two lines are the tangent bound of the concave part plus
///                   the divergence's own constant).
///
///   beta = 0 (limit form; the 1/beta constants of the two parts cancel):
///                   sum_rho x * lambda_rho^2 / z_rho
///                   + log r + (xhat - r)/r - log x - 1.
double eval_joint_surrogate_cp(const CpFactors& theta, const CpFactors& ref, const DenseTensor& x,
                               const BetaParam& p, double eps);

/// Tucker variant: rho ranges over the core multi-index set and
/// z_(i,j) = core[j] * prod_n A^(n)(i_n, j_n).
double eval_joint_surrogate_tucker(const TuckerModel& theta, const TuckerModel& ref,
                                   const DenseTensor& x, const BetaParam& p, double eps);

/// Closed-form minimizer of the scalar inner subproblem in the ratio
/// variable u = value / reference:
///   u* = (num/den)^1 for 1 <= beta < 2, u* = (num/den)^(1/(2-beta)) for
///   0 <= beta < 1, clamped to >= floor; num = 0 lands exactly on the floor.
double scalar_minimizer(double num, double den, const BetaParam& p, double floor);

/// The scalar surrogate piece g(u) the minimizer above optimizes (additive
/// constants dropped):
///   1 < beta < 2: den/beta * u^beta - num/(beta-1) * u^(beta-1)
///   beta = 1:     den * u - num * log(u)
///   0 <= beta < 1: den * u + num/(1-beta) * u^(beta-1).
double jmm_scalar_objective(double u, double num, double den, const BetaParam& p);

}  // namespace ntf::oracle
