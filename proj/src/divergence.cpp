#include "ntf/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels.hpp"

namespace ntf {

BetaParam::BetaParam(double beta) : beta_(beta) {
    if (!(beta >= 0.0 && beta < 2.0)) throw DomainError("beta must lie in [0, 2)");
    gamma_ = beta < 1.0 ? 1.0 / (2.0 - beta) : 1.0;
}

double d_beta(double x, double y, const BetaParam& p) {
    if (!(y > 0.0)) throw DomainError("d_beta: second argument must be positive");
    if (x < 0.0) throw DomainError("d_beta: first argument must be nonnegative");
    const double b = p.beta();
    if (b == 1.0) {
        // generalized Kullback-Leibler; x log x -> 0 as x -> 0
        return (x > 0.0 ? x * std::log(x / y) : 0.0) - x + y;
    }
    if (b == 0.0) {
        // Itakura-Saito; infinite for zero data entries
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        const double r = x / y;
        return r - std::log(r) - 1.0;
    }
    return (detail::fast_pow(x, b) + (b - 1.0) * detail::fast_pow(y, b) -
            b * x * detail::fast_pow(y, b - 1.0)) /
           (b * (b - 1.0));
}

double D_beta(const DenseTensor& x, const DenseTensor& xhat, const BetaParam& p) {
    if (x.shape() != xhat.shape()) throw ShapeError("D_beta: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += d_beta(x[i], xhat[i], p);
    return acc;
}

double D_beta_mean(const DenseTensor& x, const DenseTensor& xhat, const BetaParam& p) {
    return D_beta(x, xhat, p) / static_cast<double>(x.size());
}

std::pair<DenseTensor, DenseTensor> weights(const DenseTensor& x, const DenseTensor& xhat,
                                            const BetaParam& p, double eps) {
    if (x.shape() != xhat.shape()) throw ShapeError("weights: shape mismatch");
    DenseTensor pt(x.shape());
    DenseTensor qt(x.shape());
    detail::weight_entries(x.data(), xhat.data(), x.size(), p.beta(), eps, pt.data(), qt.data());
    return {std::move(pt), std::move(qt)};
}

namespace {

void chi1_entries(const double* z, const double* zref, std::size_t n, double beta, double* out) {
    const double e = beta - 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(z[i] > 0.0) || !(zref[i] > 0.0))
            throw DomainError("chi1: entries must be strictly positive");
        out[i] = zref[i] * detail::fast_pow(z[i] / zref[i], e);
    }
}

void chi2_entries(const double* z, const double* zref, std::size_t n, double beta, double* out) {
    if (beta < 1.0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(z[i] > 0.0) || !(zref[i] > 0.0))
                throw DomainError("chi2: entries must be strictly positive");
            out[i] = z[i];
        }
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(z[i] > 0.0) || !(zref[i] > 0.0))
            throw DomainError("chi2: entries must be strictly positive");
        out[i] = zref[i] * detail::fast_pow(z[i] / zref[i], beta);
    }
}

}  // namespace

DenseTensor chi1(const DenseTensor& z, const DenseTensor& zref, const BetaParam& p) {
    if (z.shape() != zref.shape()) throw ShapeError("chi1: shape mismatch");
    DenseTensor out(z.shape());
    chi1_entries(z.data(), zref.data(), z.size(), p.beta(), out.data());
    return out;
}

DenseTensor chi2(const DenseTensor& z, const DenseTensor& zref, const BetaParam& p) {
    if (z.shape() != zref.shape()) throw ShapeError("chi2: shape mismatch");
    DenseTensor out(z.shape());
    chi2_entries(z.data(), zref.data(), z.size(), p.beta(), out.data());
    return out;
}

Matrix chi1(const Matrix& z, const Matrix& zref, const BetaParam& p) {
    if (z.rows() != zref.rows() || z.cols() != zref.cols())
        throw ShapeError("chi1: shape mismatch");
    Matrix out(z.rows(), z.cols());
    chi1_entries(z.values().data(), zref.values().data(), z.size(), p.beta(),
                 out.values().data());
    return out;
}

Matrix chi2(const Matrix& z, const Matrix& zref, const BetaParam& p) {
    if (z.rows() != zref.rows() || z.cols() != zref.cols())
        throw ShapeError("chi2: shape mismatch");
    Matrix out(z.rows(), z.cols());
    chi2_entries(z.values().data(), zref.values().data(), z.size(), p.beta(),
                 out.values().data());
    return out;
}

Matrix multiplicative_update(const Matrix& anchor, const Matrix& num, const Matrix& den,
                             double gamma, double eps) {
    if (anchor.rows() != num.rows() || anchor.cols() != num.cols() || num.rows() != den.rows() ||
        num.cols() != den.cols())
        throw ShapeError("multiplicative_update: shape mismatch");
    Matrix out(anchor.rows(), anchor.cols());
    detail::multiplicative_step(anchor.values().data(), num.values().data(), den.values().data(),
                                anchor.size(), gamma, eps, out.values().data());
    return out;
}

DenseTensor multiplicative_update(const DenseTensor& anchor, const DenseTensor& num,
                                  const DenseTensor& den, double gamma, double eps) {
    if (anchor.shape() != num.shape() || num.shape() != den.shape())
        throw ShapeError("multiplicative_update: shape mismatch");
    DenseTensor out(anchor.shape());
    detail::multiplicative_step(anchor.data(), num.data(), den.data(), anchor.size(), gamma, eps,
                                out.data());
    return out;
}

}  // namespace ntf
