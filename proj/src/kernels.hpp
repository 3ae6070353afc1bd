#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

// Internal helpers shared by the solver translation units.
namespace ntf::detail {

/// std::pow with cheap paths for the handful of exponents the beta range
/// [0, 2) actually produces (0, +-1, +-2, and the half-integers).
inline double fast_pow(double x, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return x;
    if (e == -1.0) return 1.0 / x;
    if (e == 2.0) return x * x;
    if (e == -2.0) return 1.0 / (x * x);
    if (e == 0.5) return std::sqrt(x);
    if (e == -0.5) return 1.0 / std::sqrt(x);
    if (e == 1.5) return x * std::sqrt(x);
    if (e == -1.5) return 1.0 / (x * std::sqrt(x));
    return std::pow(x, e);
}

/// P = x (*) max(xhat, eps)^(beta-2), Q = max(xhat, eps)^(beta-1), written
/// into caller-provided buffers. Shared by the contraction solvers and the
/// unfolding baseline so both compute bit-identical weights. The common beta
/// values get dedicated loops; these tensors are rebuilt on every block
/// update, so the per-entry exponent dispatch is worth hoisting.
inline void weight_entries(const double* x, const double* xhat, std::size_t n, double beta,
                           double eps, double* p_out, double* q_out) {
    if (beta == 1.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double c = std::max(xhat[i], eps);
            p_out[i] = x[i] / c;
            q_out[i] = 1.0;
        }
    } else if (beta == 1.5) {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = std::sqrt(std::max(xhat[i], eps));
            p_out[i] = x[i] / s;
            q_out[i] = s;
        }
    } else if (beta == 0.5) {
        for (std::size_t i = 0; i < n; ++i) {
            const double c = std::max(xhat[i], eps);
            const double s = std::sqrt(c);
            p_out[i] = x[i] / (c * s);
            q_out[i] = 1.0 / s;
        }
    } else if (beta == 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double c = std::max(xhat[i], eps);
            p_out[i] = x[i] / (c * c);
            q_out[i] = 1.0 / c;
        }
    } else {
        const double ep = beta - 2.0;
        const double eq = beta - 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = std::max(xhat[i], eps);
            p_out[i] = x[i] * fast_pow(c, ep);
            q_out[i] = fast_pow(c, eq);
        }
    }
}

/// out = max(anchor (*) (num / max(den, eps))^gamma, eps).
inline void multiplicative_step(const double* anchor, const double* num, const double* den,
                                std::size_t n, double gamma, double eps, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = den[i] < eps ? eps : den[i];
        out[i] = std::max(anchor[i] * fast_pow(num[i] / d, gamma), eps);
    }
}

}  // namespace ntf::detail
