#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "entanglekit/errors.hpp"

namespace entanglekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Default cap on the number of f64 elements any dense intermediate may hold
// (2^26 elements = 512 MiB).  Operations that materialize dense tensors take
// a budget parameter and throw capacity_error instead of allocating past it.
inline constexpr std::size_t kDefaultElementBudget = std::size_t{1} << 26;

// ---------------------------------------------------------------------------
// DenseTensor: a dense real tensor of arbitrary order, stored row-major
// (first axis slowest).  Axes are 0-based throughout the library.
// ---------------------------------------------------------------------------
class DenseTensor {
public:
    DenseTensor() = default;

    // Zero-filled tensor with the given extents (each >= 1).
    explicit DenseTensor(std::vector<std::size_t> dims);

    // Adopts `data`, which must hold exactly prod(dims) values.
    DenseTensor(std::vector<std::size_t> dims, std::vector<double> data);

    std::size_t ndim() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double& operator[](std::size_t flat) { return data_[flat]; }

    // Multi-index access (row-major; idx.size() must equal ndim()).
    double at(std::span<const std::size_t> idx) const { return data_[flatten(idx)]; }
    double& at(std::span<const std::size_t> idx) { return data_[flatten(idx)]; }

    std::size_t flatten(std::span<const std::size_t> idx) const;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// AxisPartition: a proper, nonempty subset of the axes {0, ..., n_axes-1},
// identifying a bipartition (subset | complement).
// ---------------------------------------------------------------------------
struct AxisPartition {
    std::size_t n_axes = 0;
    std::vector<std::size_t> subset; // sorted ascending, deduplicated

    // Validates: n_axes >= 2, subset nonempty, proper, in range.  Sorts and
    // throws partition_error on violation or duplicate entries.
    AxisPartition(std::size_t n_axes_, std::vector<std::size_t> subset_);

    std::vector<std::size_t> complement() const;
};

// Matricization of A with respect to a partition: rows are indexed by the
// subset axes, columns by the complement, each in ascending axis order with
// the first listed axis slowest (lexicographic).
Matrix matricize(const DenseTensor& a, const AxisPartition& part);

// Inverse of matricize for the same dims/partition: scatters the matrix
// entries back into a dense tensor.
DenseTensor dematricize(const Matrix& m, const std::vector<std::size_t>& dims,
                        const AxisPartition& part);

// Singular values of m, descending, always min(rows, cols) of them.
// Throws numeric_error on non-finite input.
std::vector<double> singular_values(const Matrix& m);

// Shannon entropy (natural log) of the distribution rho_d = s_d^2 / sum s^2
// over the given singular values.  Values below 1e-12 * max are treated as
// exact zeros; an all-zero spectrum yields 0 by convention.
double entropy_of_singular_values(std::span<const double> sv);

// Entanglement entropy of A under the partition: entropy of the singular
// value spectrum of matricize(A, part).  Zero tensor -> 0.
double entanglement(const DenseTensor& a, const AxisPartition& part);

// Outer product of factors: result dims are the factor lengths, entry at
// (i_1, ..., i_N) is the product of factor values.  Requires >= 1 factor,
// each of length >= 1; throws capacity_error past `budget` elements.
DenseTensor outer_product(const std::vector<Vector>& factors,
                          std::size_t budget = kDefaultElementBudget);

// Frobenius inner product / norm.
double inner_product(const DenseTensor& a, const DenseTensor& b);
double norm(const DenseTensor& a);

} // namespace entanglekit
