#pragma once

#include <utility>

#include "ntf/tensor.hpp"

namespace ntf {

/// Divergence parameter beta restricted to [0, 2), together with the derived
/// multiplicative-update exponent gamma: 1/(2-beta) for beta < 1, and 1 for
/// 1 <= beta < 2.
class BetaParam {
public:
    explicit BetaParam(double beta);

    double beta() const { return beta_; }
    double gamma() const { return gamma_; }

private:
    double beta_;
    double gamma_;
};

/// Scalar beta-divergence d_beta(x | y) for x >= 0, y > 0. The beta = 0 and
/// beta = 1 branches are evaluated by their exact closed forms, not as limits
/// of the generic branch. For beta = 0 with x = 0 the result is +infinity.
double d_beta(double x, double y, const BetaParam& p);

/// Sum of entrywise divergences; shapes must match.
double D_beta(const DenseTensor& x, const DenseTensor& xhat, const BetaParam& p);

/// Mean divergence per entry: D_beta / |X|.
double D_beta_mean(const DenseTensor& x, const DenseTensor& xhat, const BetaParam& p);

/// The two weight tensors driving every multiplicative update:
///   P = X (*) max(Xhat, eps)^(beta-2),   Q = max(Xhat, eps)^(beta-1).
/// The clipping applies only inside the powers.
std::pair<DenseTensor, DenseTensor> weights(const DenseTensor& x, const DenseTensor& xhat,
                                            const BetaParam& p, double eps);

/// Reference-anchored power transforms used by the joint-MM inner updates,
/// applied entrywise:
///   chi1(Z, Zref) = Zref (*) (Z / Zref)^(beta-1)
///   chi2(Z, Zref) = Z for beta < 1, else Zref (*) (Z / Zref)^beta.
/// Both equal Z exactly when Z == Zref. Entries must be strictly positive.
DenseTensor chi1(const DenseTensor& z, const DenseTensor& zref, const BetaParam& p);
DenseTensor chi2(const DenseTensor& z, const DenseTensor& zref, const BetaParam& p);
Matrix chi1(const Matrix& z, const Matrix& zref, const BetaParam& p);
Matrix chi2(const Matrix& z, const Matrix& zref, const BetaParam& p);

/// The multiplicative step shared by all solvers:
///   out = max(anchor (*) (num / max(den, eps))^gamma, eps).
/// A zero numerator therefore lands exactly on the eps floor.
Matrix multiplicative_update(const Matrix& anchor, const Matrix& num, const Matrix& den,
                             double gamma, double eps);
DenseTensor multiplicative_update(const DenseTensor& anchor, const DenseTensor& num,
                                  const DenseTensor& den, double gamma, double eps);

}  // namespace ntf
