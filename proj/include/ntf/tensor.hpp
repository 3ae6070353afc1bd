#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ntf/errors.hpp"

namespace ntf {

/// Zero-based coordinates into an N-way tensor, one entry per mode.
using MultiIndex = std::vector<std::size_t>;

/// Dense N-way tensor of doubles stored flat in row-major order (last index
/// fastest). Shape is fixed at construction: order >= 1, every dimension
/// >= 1 (length-1 modes are fine), and the value count must equal the shape
/// product. All operations below are pure functions on immutable inputs;
/// values are safe to share across threads.
class DenseTensor {
public:
    DenseTensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit DenseTensor(std::vector<std::size_t> shape);

    DenseTensor(std::vector<std::size_t> shape, std::vector<double> values);

    static DenseTensor full(std::vector<std::size_t> shape, double value);

    std::size_t order() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t dim(std::size_t axis) const { return shape_[axis]; }
    std::size_t size() const { return values_.size(); }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double operator[](std::size_t flat) const { return values_[flat]; }
    double& operator[](std::size_t flat) { return values_[flat]; }

    /// Row-major flat offset of a full multi-index; bounds-checked.
    std::size_t flat_index(std::span<const std::size_t> index) const;

    double at(std::span<const std::size_t> index) const { return values_[flat_index(index)]; }
    double& at(std::span<const std::size_t> index) { return values_[flat_index(index)]; }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

/// Row-major dense matrix. Factor matrices are small, so this stays thin.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix full(std::size_t rows, std::size_t cols, double value);
    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

    const double* row(std::size_t i) const { return values_.data() + i * cols_; }
    double* row(std::size_t i) { return values_.data() + i * cols_; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// Odometer-style increment over `shape`; returns false once the index wraps
/// past the last position.
bool next_multi_index(MultiIndex& index, std::span<const std::size_t> shape);

// ---- elementwise operations -----------------------------------------------

DenseTensor mul(const DenseTensor& a, const DenseTensor& b);
DenseTensor mul(const DenseTensor& a, double s);
DenseTensor div(const DenseTensor& a, const DenseTensor& b);

/// Entrywise power. Nonpositive bases with a negative exponent are rejected.
DenseTensor pow(const DenseTensor& a, double exponent);

/// Entrywise power with the positivity safeguard max(base, eps) applied
/// before exponentiation. Never yields NaN or infinities for nonnegative
/// input and finite exponents.
DenseTensor pow_clipped(const DenseTensor& a, double exponent, double eps);

DenseTensor cwise_max(const DenseTensor& a, double s);

// ---- contractions -----------------------------------------------------------

/// Mode-n product: contracts axis `mode` of t against the columns of m
/// (m has shape J x I_mode); the result carries J at that axis.
DenseTensor mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode);

/// Reorders axes: axis k of the result is axis perm[k] of the input.
DenseTensor permute_axes(const DenseTensor& t, std::span<const std::size_t> perm);

/// CP contraction:
///   out(i_mode, r) = sum over all other indices of
///                    t[i] * prod_{m != mode} factors[m](i_m, r).
/// `factors` holds one matrix per mode; factors[mode] only contributes its
/// column count (needed when the tensor has a single mode). The contraction
/// runs one mode at a time, at each step picking the mode whose removal
/// leaves the smallest surviving intermediate, so no Khatri-Rao or Kronecker
/// product is ever materialized.
Matrix cp_contract(const DenseTensor& t, std::span<const Matrix> factors, std::size_t mode);

/// Tucker reconstruction: the core multiplied along each mode by its factor
/// (factors[n] has shape I_n x J_n where J_n is the core's n-th dimension).
DenseTensor tucker_reconstruct(const DenseTensor& core, std::span<const Matrix> factors);

/// Contracts every data-side index of t against the matching factor:
///   out(j_1,...,j_N) = sum_i t[i] * prod_n factors[n](i_n, j_n).
/// With `skip = n`, mode n stays uncontracted and is moved to the last axis;
/// the output shape is (J_m for m != n in ascending m, then I_n).
DenseTensor tucker_multimode_contract(const DenseTensor& t, std::span<const Matrix> factors,
                                      std::optional<std::size_t> skip = std::nullopt);

/// Default cap on intermediate entries for the fused factor contraction.
inline constexpr std::size_t kFusedContractionBudget = std::size_t{1} << 27;

/// Fused factor-update contraction:
///   out(i_n, j_n) = sum_{i_-n} sum_{j_-n} t[i] * core[j]
///                   * prod_{m != n} factors[m](i_m, j_m).
/// Contracts t against the off-mode factors first (mode n kept), then pairs
/// the small result with the core, so the partial reconstruction over mode n
/// is never materialized. Falls back to materializing it when the fused
/// intermediates would exceed `budget` entries.
Matrix tucker_factor_contract(const DenseTensor& t, const DenseTensor& core,
                              std::span<const Matrix> factors, std::size_t mode,
                              std::size_t budget = kFusedContractionBudget);

}  // namespace ntf
