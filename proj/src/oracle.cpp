#include "ntf/oracle.hpp"

#include <cmath>

namespace ntf::oracle {

DenseTensor brute_cp_reconstruct(const CpFactors& f) {
    DenseTensor out(f.dims());
    MultiIndex i(f.order(), 0);
    std::size_t flat = 0;
    do {
        double acc = 0.0;
        for (std::size_t r = 0; r < f.rank(); ++r) {
            double z = 1.0;
            for (std::size_t n = 0; n < f.order(); ++n) z *= f.factors[n](i[n], r);
            acc += z;
        }
        out[flat++] = acc;
    } while (next_multi_index(i, out.shape()));
    return out;
}

DenseTensor brute_tucker_reconstruct(const DenseTensor& core, std::span<const Matrix> factors) {
    std::vector<std::size_t> shape(factors.size());
    for (std::size_t n = 0; n < factors.size(); ++n) shape[n] = factors[n].rows();
    DenseTensor out(shape);
    MultiIndex i(out.order(), 0);
    std::size_t flat = 0;
    do {
        double acc = 0.0;
        MultiIndex j(core.order(), 0);
        std::size_t jflat = 0;
        do {
            double z = core[jflat++];
            for (std::size_t n = 0; n < core.order(); ++n) z *= factors[n](i[n], j[n]);
            acc += z;
        } while (next_multi_index(j, core.shape()));
        out[flat++] = acc;
    } while (next_multi_index(i, out.shape()));
    return out;
}

Matrix brute_cp_contract(const DenseTensor& t, std::span<const Matrix> factors,
                         std::size_t mode) {
    const std::size_t r = factors[mode].cols();
    Matrix out(t.dim(mode), r);
    MultiIndex i(t.order(), 0);
    std::size_t flat = 0;
    do {
        for (std::size_t k = 0; k < r; ++k) {
            double w = 1.0;
            for (std::size_t m = 0; m < t.order(); ++m)
                if (m != mode) w *= factors[m](i[m], k);
            out(i[mode], k) += t[flat] * w;
        }
        ++flat;
    } while (next_multi_index(i, t.shape()));
    return out;
}

DenseTensor brute_mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode) {
    std::vector<std::size_t> shape = t.shape();
    shape[mode] = m.rows();
    DenseTensor out(shape);
    MultiIndex i(out.order(), 0);
    std::size_t flat = 0;
    do {
        double acc = 0.0;
        MultiIndex src = i;
        for (std::size_t k = 0; k < t.dim(mode); ++k) {
            src[mode] = k;
            acc += t.at(src) * m(i[mode], k);
        }
        out[flat++] = acc;
    } while (next_multi_index(i, out.shape()));
    return out;
}

DenseTensor brute_multimode_contract(const DenseTensor& t, std::span<const Matrix> factors) {
    std::vector<std::size_t> shape(factors.size());
    for (std::size_t n = 0; n < factors.size(); ++n) shape[n] = factors[n].cols();
    DenseTensor out(shape);
    MultiIndex j(out.order(), 0);
    std::size_t jflat = 0;
    do {
        double acc = 0.0;
        MultiIndex i(t.order(), 0);
        std::size_t flat = 0;
        do {
            double w = t[flat++];
            for (std::size_t n = 0; n < t.order(); ++n) w *= factors[n](i[n], j[n]);
            acc += w;
        } while (next_multi_index(i, t.shape()));
        out[jflat++] = acc;
    } while (next_multi_index(j, out.shape()));
    return out;
}

Matrix brute_tucker_factor_contract(const DenseTensor& t, const DenseTensor& core,
                                    std::span<const Matrix> factors, std::size_t mode) {
    Matrix out(t.dim(mode), core.dim(mode));
    MultiIndex i(t.order(), 0);
    std::size_t flat = 0;
    do {
        MultiIndex j(core.order(), 0);
        std::size_t jflat = 0;
        do {
            double w = t[flat] * core[jflat++];
            for (std::size_t m = 0; m < t.order(); ++m)
                if (m != mode) w *= factors[m](i[m], j[m]);
            out(i[mode], j[mode]) += w;
        } while (next_multi_index(j, core.shape()));
        ++flat;
    } while (next_multi_index(i, t.shape()));
    return out;
}

// ---- component weights ---------------------------------------------------------

ComponentWeights cp_component_weights(const CpFactors& ref) {
    const std::size_t r = ref.rank();
    const std::vector<std::size_t> dims = ref.dims();
    std::size_t entries = 1;
    for (std::size_t d : dims) entries *= d;

    ComponentWeights w;
    w.components = r;
    w.lambda.resize(entries * r);
    MultiIndex i(ref.order(), 0);
    std::size_t e = 0;
    do {
        double total = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
            double z = 1.0;
            for (std::size_t n = 0; n < ref.order(); ++n) z *= ref.factors[n](i[n], k);
            w.lambda[e * r + k] = z;
            total += z;
        }
        for (std::size_t k = 0; k < r; ++k) w.lambda[e * r + k] /= total;
        ++e;
    } while (next_multi_index(i, dims));
    return w;
}

ComponentWeights tucker_component_weights(const TuckerModel& ref) {
    const std::size_t comps = ref.core.size();
    const std::vector<std::size_t> dims = ref.dims();
    std::size_t entries = 1;
    for (std::size_t d : dims) entries *= d;

    ComponentWeights w;
    w.components = comps;
    w.lambda.resize(entries * comps);
    MultiIndex i(ref.order(), 0);
    std::size_t e = 0;
    do {
        double total = 0.0;
        MultiIndex j(ref.core.order(), 0);
        std::size_t jflat = 0;
        do {
            double z = ref.core[jflat];
            for (std::size_t n = 0; n < ref.order(); ++n) z *= ref.factors[n](i[n], j[n]);
            w.lambda[e * comps + jflat] = z;
            total += z;
            ++jflat;
        } while (next_multi_index(j, ref.core.shape()));
        for (std::size_t k = 0; k < comps; ++k) w.lambda[e * comps + k] /= total;
        ++e;
    } while (next_multi_index(i, dims));
    return w;
}

// ---- joint surrogate --------------------------------------------------------------

namespace {

// One entry's surrogate value from its data value x, reference reconstruction
// r, current reconstruction xhat, and the per-component contributions of the
// current point (z) and the reference (ztilde). See the header for the three
// branch forms; the beta = 0 and beta = 1 cases are the analytic limits.
double entry_surrogate(double x, double r, double xhat, std::span<const double> z,
                       std::span<const double> ztilde, const BetaParam& p) {
    const double b = p.beta();
    double acc = 0.0;
    if (b >= 1.0) {
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double lambda = ztilde[k] / r;
            acc += lambda * d_beta(x, z[k] / lambda, p);
        }
        return acc;
    }
    if (b > 0.0) {
        for (std::size_t k = 0; k < z.size(); ++k) {
            const double lambda = ztilde[k] / r;
            acc += lambda * (x / (1.0 - b)) * std::pow(z[k] / lambda, b - 1.0);
        }
        acc += std::pow(r, b) / b + std::pow(r, b - 1.0) * (xhat - r);
        acc += std::pow(x, b) / (b * (b - 1.0));
        return acc;
    }
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double lambda = ztilde[k] / r;
        acc += x * lambda * lambda / z[k];
    }
    acc += std::log(r) + (xhat - r) / r - std::log(x) - 1.0;
    return acc;
}

}  // namespace

double eval_joint_surrogate_cp(const CpFactors& theta, const CpFactors& ref, const DenseTensor& x,
                               const BetaParam& p, double /*eps*/) {
    const std::size_t r = ref.rank();
    std::vector<double> z(r);
    std::vector<double> zt(r);
    double total = 0.0;
    MultiIndex i(x.order(), 0);
    std::size_t flat = 0;
    do {
        double xhat = 0.0;
        double rref = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
            double zc = 1.0;
            double zr = 1.0;
            for (std::size_t n = 0; n < x.order(); ++n) {
                zc *= theta.factors[n](i[n], k);
                zr *= ref.factors[n](i[n], k);
            }
            z[k] = zc;
            zt[k] = zr;
            xhat += zc;
            rref += zr;
        }
        total += entry_surrogate(x[flat], rref, xhat, z, zt, p);
        ++flat;
    } while (next_multi_index(i, x.shape()));
    return total;
}

double eval_joint_surrogate_tucker(const TuckerModel& theta, const TuckerModel& ref,
                                   const DenseTensor& x, const BetaParam& p, double /*eps*/) {
    const std::size_t comps = ref.core.size();
    std::vector<double> z(comps);
    std::vector<double> zt(comps);
    double total = 0.0;
    MultiIndex i(x.order(), 0);
    std::size_t flat = 0;
    do {
        double xhat = 0.0;
        double rref = 0.0;
        MultiIndex j(ref.core.order(), 0);
        std::size_t jflat = 0;
        do {
            double zc = theta.core[jflat];
            double zr = ref.core[jflat];
            for (std::size_t n = 0; n < x.order(); ++n) {
                zc *= theta.factors[n](i[n], j[n]);
                zr *= ref.factors[n](i[n], j[n]);
            }
            z[jflat] = zc;
            zt[jflat] = zr;
            xhat += zc;
            rref += zr;
            ++jflat;
        } while (next_multi_index(j, ref.core.shape()));
        total += entry_surrogate(x[flat], rref, xhat, z, zt, p);
        ++flat;
    } while (next_multi_index(i, x.shape()));
    return total;
}

// ---- scalar subproblem --------------------------------------------------------------

double scalar_minimizer(double num, double den, const BetaParam& p, double floor) {
    if (!(den > 0.0)) throw DomainError("scalar_minimizer: denominator must be positive");
    if (num < 0.0) throw DomainError("scalar_minimizer: numerator must be nonnegative");
    if (num == 0.0) return floor;
    const double ratio = num / den;
    const double u = p.gamma() == 1.0 ? ratio : std::pow(ratio, p.gamma());
    return std::max(u, floor);
}

double jmm_scalar_objective(double u, double num, double den, const BetaParam& p) {
    const double b = p.beta();
    if (b > 1.0) return den / b * std::pow(u, b) - num / (b - 1.0) * std::pow(u, b - 1.0);
    if (b == 1.0) return den * u - num * std::log(u);
    return den * u + num / (1.0 - b) * std::pow(u, b - 1.0);
}

}  // namespace ntf::oracle
