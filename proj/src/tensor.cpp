#include "ntf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "kernels.hpp"

namespace ntf {

namespace {

std::size_t shape_product(std::span<const std::size_t> dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

void validate_shape(std::span<const std::size_t> shape) {
    if (shape.empty()) throw ShapeError("tensor order must be >= 1");
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be >= 1");
    }
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* op) {
    if (a.shape() != b.shape()) throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace

// ---- DenseTensor -------------------------------------------------------------

DenseTensor::DenseTensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    validate_shape(shape_);
    values_.assign(shape_product(shape_), 0.0);
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    validate_shape(shape_);
    if (values_.size() != shape_product(shape_))
        throw ShapeError("tensor value count does not match shape product");
}

DenseTensor DenseTensor::full(std::vector<std::size_t> shape, double value) {
    DenseTensor t(std::move(shape));
    std::fill(t.values_.begin(), t.values_.end(), value);
    return t;
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw ShapeError("multi-index length does not match order");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (index[a] >= shape_[a]) throw ShapeError("multi-index coordinate out of range");
        flat = flat * shape_[a] + index[a];
    }
    return flat;
}

bool next_multi_index(MultiIndex& index, std::span<const std::size_t> shape) {
    for (std::size_t a = shape.size(); a-- > 0;) {
        if (++index[a] < shape[a]) return true;
        index[a] = 0;
    }
    return false;
}

// ---- Matrix -------------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_)
        throw ShapeError("matrix value count does not match rows * cols");
}

Matrix Matrix::full(std::size_t rows, std::size_t cols, double value) {
    Matrix m(rows, cols);
    std::fill(m.values_.begin(), m.values_.end(), value);
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i);
        const double* arow = a.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double v = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += v * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

// ---- elementwise ----------------------------------------------------------------

DenseTensor mul(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "mul");
    DenseTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

DenseTensor mul(const DenseTensor& a, double s) {
    DenseTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

DenseTensor div(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "div");
    DenseTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / b[i];
    return out;
}

DenseTensor pow(const DenseTensor& a, double exponent) {
    DenseTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (exponent < 0.0 && a[i] <= 0.0)
            throw DomainError("pow: nonpositive base with negative exponent");
        out[i] = detail::fast_pow(a[i], exponent);
    }
    return out;
}

DenseTensor pow_clipped(const DenseTensor& a, double exponent, double eps) {
    DenseTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = detail::fast_pow(std::max(a[i], eps), exponent);
    return out;
}

DenseTensor cwise_max(const DenseTensor& a, double s) {
    DenseTensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], s);
    return out;
}

// ---- contractions ----------------------------------------------------------------

DenseTensor mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode) {
    if (mode >= t.order()) throw ShapeError("mode_n_product: mode out of range");
    if (m.cols() != t.dim(mode))
        throw ShapeError("mode_n_product: matrix columns do not match the contracted dimension");

    const std::size_t mid = t.dim(mode);
    const std::size_t j = m.rows();
    std::size_t outer = 1, inner = 1;
    for (std::size_t a = 0; a < mode; ++a) outer *= t.dim(a);
    for (std::size_t a = mode + 1; a < t.order(); ++a) inner *= t.dim(a);

    std::vector<std::size_t> shape = t.shape();
    shape[mode] = j;
    DenseTensor out(std::move(shape));
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t mi = 0; mi < mid; ++mi) {
            const double* src = t.data() + (o * mid + mi) * inner;
            for (std::size_t r = 0; r < j; ++r) {
                const double c = m(r, mi);
                double* dst = out.data() + (o * j + r) * inner;
                for (std::size_t in = 0; in < inner; ++in) dst[in] += c * src[in];
            }
        }
    }
    return out;
}

DenseTensor permute_axes(const DenseTensor& t, std::span<const std::size_t> perm) {
    const std::size_t n = t.order();
    if (perm.size() != n) throw ShapeError("permute_axes: permutation length mismatch");
    std::vector<bool> seen(n, false);
    for (std::size_t a : perm) {
        if (a >= n || seen[a]) throw ShapeError("permute_axes: not a permutation");
        seen[a] = true;
    }

    std::vector<std::size_t> shape(n);
    for (std::size_t k = 0; k < n; ++k) shape[k] = t.dim(perm[k]);

    // Output stride attached to each *input* axis.
    std::vector<std::size_t> out_stride(n, 1);
    {
        std::vector<std::size_t> stride(n, 1);
        for (std::size_t k = n; k-- > 1;) stride[k - 1] = stride[k] * shape[k];
        for (std::size_t k = 0; k < n; ++k) out_stride[perm[k]] = stride[k];
    }

    DenseTensor out(std::move(shape));
    MultiIndex idx(n, 0);
    std::size_t flat = 0;
    do {
        std::size_t pos = 0;
        for (std::size_t a = 0; a < n; ++a) pos += idx[a] * out_stride[a];
        out[pos] = t[flat];
        ++flat;
    } while (next_multi_index(idx, t.shape()));
    return out;
}

namespace {

// Working state for chained single-mode contractions: the surviving axes keep
// ascending original-mode order; a trailing component axis appears after the
// first CP-style step. The first step reads straight from the source tensor,
// so nothing is copied until a contraction actually produces output.
struct Chain {
    const double* src = nullptr;  // borrowed until the first step materializes
    std::vector<double> values;
    std::vector<std::size_t> dims;
    std::vector<std::size_t> modes;
    std::size_t comp = 0;  // component-axis length, 0 if absent

    const double* data() const { return values.empty() ? src : values.data(); }

    void materialize() {
        if (!values.empty()) return;
        std::size_t n = comp == 0 ? 1 : comp;
        for (std::size_t d : dims) n *= d;
        values.assign(src, src + n);
    }

    std::size_t axis_of(std::size_t mode) const {
        for (std::size_t a = 0; a < modes.size(); ++a)
            if (modes[a] == mode) return a;
        throw ShapeError("contraction: mode already consumed");
    }
};

Chain chain_from(const DenseTensor& t) {
    Chain c;
    c.src = t.data();
    c.dims = t.shape();
    c.modes.resize(t.order());
    std::iota(c.modes.begin(), c.modes.end(), std::size_t{0});
    return c;
}

void split_extents(const Chain& c, std::size_t axis, std::size_t& outer, std::size_t& inner) {
    outer = 1;
    inner = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= c.dims[a];
    for (std::size_t a = axis + 1; a < c.dims.size(); ++a) inner *= c.dims[a];
}

// CP-style step: sum out one mode against b (dim x R), carrying the shared
// component axis r in the output.
void contract_component(Chain& c, std::size_t mode, const Matrix& b) {
    const std::size_t axis = c.axis_of(mode);
    const std::size_t mid = c.dims[axis];
    const std::size_t r = b.cols();
    std::size_t outer, inner;
    split_extents(c, axis, outer, inner);

    const double* base = c.data();
    std::vector<double> out(outer * inner * r, 0.0);
    if (c.comp == 0) {
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t mi = 0; mi < mid; ++mi) {
                const double* src = base + (o * mid + mi) * inner;
                const double* brow = b.row(mi);
                double* dst = out.data() + o * inner * r;
                for (std::size_t in = 0; in < inner; ++in) {
                    const double v = src[in];
                    double* d = dst + in * r;
                    for (std::size_t k = 0; k < r; ++k) d[k] += v * brow[k];
                }
            }
        }
    } else {
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t mi = 0; mi < mid; ++mi) {
                const double* src = base + ((o * mid + mi) * inner) * r;
                const double* brow = b.row(mi);
                double* dst = out.data() + (o * inner) * r;
                for (std::size_t in = 0; in < inner; ++in) {
                    const double* s = src + in * r;
                    double* d = dst + in * r;
                    for (std::size_t k = 0; k < r; ++k) d[k] += s[k] * brow[k];
                }
            }
        }
    }
    c.values = std::move(out);
    c.dims.erase(c.dims.begin() + static_cast<std::ptrdiff_t>(axis));
    c.modes.erase(c.modes.begin() + static_cast<std::ptrdiff_t>(axis));
    c.comp = r;
}

// Tucker-style step: replace one axis (length rows(m)) by cols(m),
// out[.., j, ..] = sum_i in[.., i, ..] * m(i, j).
void replace_axis(Chain& c, std::size_t mode, const Matrix& m) {
    const std::size_t axis = c.axis_of(mode);
    const std::size_t mid = c.dims[axis];
    const std::size_t j = m.cols();
    std::size_t outer, inner;
    split_extents(c, axis, outer, inner);

    const double* base = c.data();
    std::vector<double> out(outer * j * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t mi = 0; mi < mid; ++mi) {
            const double* src = base + (o * mid + mi) * inner;
            const double* mrow = m.row(mi);
            for (std::size_t r = 0; r < j; ++r) {
                const double v = mrow[r];
                double* dst = out.data() + (o * j + r) * inner;
                for (std::size_t in = 0; in < inner; ++in) dst[in] += v * src[in];
            }
        }
    }
    c.values = std::move(out);
    c.dims[axis] = j;
}

std::size_t chain_entries(const Chain& c) {
    std::size_t n = c.comp == 0 ? 1 : c.comp;
    for (std::size_t d : c.dims) n *= d;
    return n;
}

// Greedy path: among the pending modes, contract the one whose result is
// smallest; ties resolve to the lowest mode index for determinism.
std::size_t pick_smallest_result(const Chain& c, std::span<const std::size_t> pending,
                                 std::span<const std::size_t> replacement) {
    const std::size_t cur = chain_entries(c);
    std::size_t best = pending[0];
    std::size_t best_size = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < pending.size(); ++k) {
        const std::size_t mode = pending[k];
        const std::size_t axis = c.axis_of(mode);
        const std::size_t candidate = cur / c.dims[axis] * replacement[k];
        if (candidate < best_size) {
            best_size = candidate;
            best = mode;
        }
    }
    return best;
}

void validate_factor_count(const DenseTensor& t, std::span<const Matrix> factors,
                           const char* op) {
    if (factors.size() != t.order())
        throw ShapeError(std::string(op) + ": expected one factor per mode");
}

}  // namespace

Matrix cp_contract(const DenseTensor& t, std::span<const Matrix> factors, std::size_t mode) {
    validate_factor_count(t, factors, "cp_contract");
    if (mode >= t.order()) throw ShapeError("cp_contract: mode out of range");
    const std::size_t r = factors[mode].cols();
    for (std::size_t m = 0; m < t.order(); ++m) {
        if (m == mode) continue;
        if (factors[m].rows() != t.dim(m))
            throw ShapeError("cp_contract: factor rows do not match tensor dimension");
        if (factors[m].cols() != r) throw ShapeError("cp_contract: inconsistent column counts");
    }

    Chain c = chain_from(t);
    std::vector<std::size_t> pending;
    for (std::size_t m = 0; m < t.order(); ++m)
        if (m != mode) pending.push_back(m);

    if (pending.empty()) {
        // Single-mode tensor: the off-mode product is empty, every column is
        // the tensor itself.
        Matrix out(t.dim(mode), r);
        for (std::size_t i = 0; i < t.dim(mode); ++i)
            for (std::size_t k = 0; k < r; ++k) out(i, k) = t[i];
        return out;
    }

    while (!pending.empty()) {
        // The first step introduces the component axis; later steps only drop
        // one axis each.
        const std::vector<std::size_t> repl(pending.size(), c.comp == 0 ? r : 1);
        const std::size_t next = pick_smallest_result(c, pending, repl);
        contract_component(c, next, factors[next]);
        pending.erase(std::find(pending.begin(), pending.end(), next));
    }
    return Matrix(t.dim(mode), r, std::move(c.values));
}

DenseTensor tucker_reconstruct(const DenseTensor& core, std::span<const Matrix> factors) {
    validate_factor_count(core, factors, "tucker_reconstruct");
    for (std::size_t n = 0; n < core.order(); ++n) {
        if (factors[n].cols() != core.dim(n))
            throw ShapeError("tucker_reconstruct: factor columns do not match core dimension");
    }
    Chain c = chain_from(core);
    for (std::size_t n = 0; n < core.order(); ++n) replace_axis(c, n, transpose(factors[n]));
    std::vector<std::size_t> shape(core.order());
    for (std::size_t n = 0; n < core.order(); ++n) shape[n] = factors[n].rows();
    return DenseTensor(std::move(shape), std::move(c.values));
}

DenseTensor tucker_multimode_contract(const DenseTensor& t, std::span<const Matrix> factors,
                                      std::optional<std::size_t> skip) {
    validate_factor_count(t, factors, "tucker_multimode_contract");
    if (skip && *skip >= t.order())
        throw ShapeError("tucker_multimode_contract: skip mode out of range");
    std::vector<std::size_t> pending;
    std::vector<std::size_t> repl;
    for (std::size_t m = 0; m < t.order(); ++m) {
        if (skip && *skip == m) continue;
        if (factors[m].rows() != t.dim(m))
            throw ShapeError("tucker_multimode_contract: factor rows do not match dimension");
        pending.push_back(m);
        repl.push_back(factors[m].cols());
    }

    Chain c = chain_from(t);
    while (!pending.empty()) {
        const std::size_t next = pick_smallest_result(c, pending, repl);
        const auto at = std::find(pending.begin(), pending.end(), next);
        replace_axis(c, next, factors[next]);
        repl.erase(repl.begin() + (at - pending.begin()));
        pending.erase(at);
    }

    c.materialize();  // no-op unless no mode was contracted
    DenseTensor out(c.dims, std::move(c.values));
    if (skip) {
        // Move the untouched data axis to the back.
        std::vector<std::size_t> perm;
        for (std::size_t a = 0; a < out.order(); ++a)
            if (a != *skip) perm.push_back(a);
        perm.push_back(*skip);
        out = permute_axes(out, perm);
    }
    return out;
}

namespace {

// Materialized fallback: build the partial reconstruction over every mode but
// `mode` (core axis kept there), then pair it with t.
Matrix factor_contract_materialized(const DenseTensor& t, const DenseTensor& core,
                                    std::span<const Matrix> factors, std::size_t mode) {
    Chain c = chain_from(core);
    for (std::size_t m = 0; m < core.order(); ++m)
        if (m != mode) replace_axis(c, m, transpose(factors[m]));
    c.materialize();
    // c now has axes (I_0, ..., J_mode, ..., I_{N-1}).
    const std::size_t jn = core.dim(mode);
    const std::size_t in = t.dim(mode);
    std::size_t outer, inner;
    {
        outer = 1;
        inner = 1;
        for (std::size_t a = 0; a < mode; ++a) outer *= t.dim(a);
        for (std::size_t a = mode + 1; a < t.order(); ++a) inner *= t.dim(a);
    }
    Matrix out(in, jn);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < in; ++i) {
            const double* trow = t.data() + (o * in + i) * inner;
            double* dst = out.row(i);
            for (std::size_t j = 0; j < jn; ++j) {
                const double* brow = c.values.data() + (o * jn + j) * inner;
                double acc = 0.0;
                for (std::size_t k = 0; k < inner; ++k) acc += trow[k] * brow[k];
                dst[j] += acc;
            }
        }
    }
    return out;
}

std::size_t fused_peak_entries(const DenseTensor& t, std::span<const Matrix> factors,
                               std::size_t mode) {
    std::size_t cur = t.size();
    std::size_t peak = cur;
    // Mirrors the greedy order: repeatedly apply the best shrink ratio.
    std::vector<std::pair<std::size_t, std::size_t>> dims;  // (I_m, J_m)
    for (std::size_t m = 0; m < t.order(); ++m)
        if (m != mode) dims.emplace_back(t.dim(m), factors[m].cols());
    std::sort(dims.begin(), dims.end(), [](auto a, auto b) {
        return a.second * b.first < b.second * a.first;  // J_a/I_a < J_b/I_b
    });
    for (auto [i, j] : dims) {
        cur = cur / i * j;
        peak = std::max(peak, cur);
    }
    return peak;
}

}  // namespace

Matrix tucker_factor_contract(const DenseTensor& t, const DenseTensor& core,
                              std::span<const Matrix> factors, std::size_t mode,
                              std::size_t budget) {
    validate_factor_count(t, factors, "tucker_factor_contract");
    if (core.order() != t.order())
        throw ShapeError("tucker_factor_contract: core order does not match tensor order");
    if (mode >= t.order()) throw ShapeError("tucker_factor_contract: mode out of range");
    for (std::size_t m = 0; m < t.order(); ++m) {
        if (m == mode) continue;
        if (factors[m].rows() != t.dim(m) || factors[m].cols() != core.dim(m))
            throw ShapeError("tucker_factor_contract: factor shape mismatch");
    }

    if (fused_peak_entries(t, factors, mode) > budget)
        return factor_contract_materialized(t, core, factors, mode);

    const DenseTensor s = tucker_multimode_contract(t, factors, mode);
    // s axes: (J_m for m != mode ascending, I_mode); pair with the core over
    // the off-mode component indices.
    const std::size_t in = t.dim(mode);
    const std::size_t jn = core.dim(mode);
    std::vector<std::size_t> rest_stride(core.order(), 0);
    {
        std::size_t stride = 1;
        for (std::size_t a = core.order(); a-- > 0;) {
            if (a == mode) continue;
            rest_stride[a] = stride;
            stride *= core.dim(a);
        }
    }

    Matrix out(in, jn);
    MultiIndex j(core.order(), 0);
    std::size_t jflat = 0;
    do {
        const double g = core[jflat];
        ++jflat;
        if (g == 0.0) continue;
        std::size_t rest = 0;
        for (std::size_t a = 0; a < core.order(); ++a)
            if (a != mode) rest += j[a] * rest_stride[a];
        const double* srow = s.data() + rest * in;
        const std::size_t jcol = j[mode];
        for (std::size_t i = 0; i < in; ++i) out(i, jcol) += srow[i] * g;
    } while (next_multi_index(j, core.shape()));
    return out;
}

}  // namespace ntf
