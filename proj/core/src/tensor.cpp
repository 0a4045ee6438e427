#include "entanglekit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

namespace entanglekit {

namespace {

std::size_t checked_element_count(const std::vector<std::size_t>& dims) {
    if (dims.empty())
        throw shape_error("tensor must have at least one axis");
    std::size_t count = 1;
    for (std::size_t d : dims) {
        if (d == 0)
            throw shape_error("tensor axis extent must be >= 1");
        if (d != 0 && count > std::numeric_limits<std::size_t>::max() / d)
            throw capacity_error("tensor element count overflows size_t");
        count *= d;
    }
    return count;
}

} // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims)), data_(checked_element_count(dims_), 0.0) {}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    if (checked_element_count(dims_) != data_.size())
        throw shape_error("tensor data length does not match extents");
}

std::size_t DenseTensor::flatten(std::span<const std::size_t> idx) const {
    if (idx.size() != dims_.size())
        throw shape_error("multi-index order does not match tensor order");
    std::size_t flat = 0;
    for (std::size_t ax = 0; ax < dims_.size(); ++ax) {
        if (idx[ax] >= dims_[ax])
            throw shape_error("multi-index out of range");
        flat = flat * dims_[ax] + idx[ax];
    }
    return flat;
}

AxisPartition::AxisPartition(std::size_t n_axes_, std::vector<std::size_t> subset_)
    : n_axes(n_axes_), subset(std::move(subset_)) {
    if (n_axes < 2)
        throw partition_error("bipartitions need at least two axes");
    std::sort(subset.begin(), subset.end());
    if (std::adjacent_find(subset.begin(), subset.end()) != subset.end())
        throw partition_error("axis subset contains a duplicate");
    if (subset.empty() || subset.size() >= n_axes)
        throw partition_error("axis subset must be nonempty and proper");
    if (subset.back() >= n_axes)
        throw partition_error("axis index out of range");
}

std::vector<std::size_t> AxisPartition::complement() const {
    std::vector<std::size_t> out;
    out.reserve(n_axes - subset.size());
    auto it = subset.begin();
    for (std::size_t ax = 0; ax < n_axes; ++ax) {
        if (it != subset.end() && *it == ax)
            ++it;
        else
            out.push_back(ax);
    }
    return out;
}

namespace {

// Per-axis contribution of each index digit to the (row, col) pair of the
// matricized layout.  Subset axes feed the row index, complement axes the
// column index, both lexicographic with the first (smallest) axis slowest.
struct MatricizeStrides {
    std::vector<std::size_t> row_stride; // 0 for complement axes
    std::vector<std::size_t> col_stride; // 0 for subset axes
    std::size_t rows = 1;
    std::size_t cols = 1;
};

MatricizeStrides matricize_strides(const std::vector<std::size_t>& dims,
                                   const AxisPartition& part) {
    if (part.n_axes != dims.size())
        throw partition_error("partition axis count does not match tensor order");
    MatricizeStrides s;
    s.row_stride.assign(dims.size(), 0);
    s.col_stride.assign(dims.size(), 0);
    const auto comp = part.complement();
    for (auto it = part.subset.rbegin(); it != part.subset.rend(); ++it) {
        s.row_stride[*it] = s.rows;
        s.rows *= dims[*it];
    }
    for (auto it = comp.rbegin(); it != comp.rend(); ++it) {
        s.col_stride[*it] = s.cols;
        s.cols *= dims[*it];
    }
    return s;
}

} // namespace

Matrix matricize(const DenseTensor& a, const AxisPartition& part) {
    const auto& dims = a.dims();
    const auto s = matricize_strides(dims, part);
    Matrix m(s.rows, s.cols);

    // Walk the flat data once, maintaining the multi-index as an odometer and
    // the (row, col) pair incrementally.
    std::vector<std::size_t> idx(dims.size(), 0);
    std::size_t row = 0, col = 0;
    const std::size_t total = a.size();
    for (std::size_t flat = 0;; ++flat) {
        m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = a[flat];
        if (flat + 1 == total)
            break;
        for (std::size_t ax = dims.size(); ax-- > 0;) {
            ++idx[ax];
            row += s.row_stride[ax];
            col += s.col_stride[ax];
            if (idx[ax] < dims[ax])
                break;
            row -= s.row_stride[ax] * dims[ax];
            col -= s.col_stride[ax] * dims[ax];
            idx[ax] = 0;
        }
    }
    return m;
}

DenseTensor dematricize(const Matrix& m, const std::vector<std::size_t>& dims,
                        const AxisPartition& part) {
    const auto s = matricize_strides(dims, part);
    if (static_cast<std::size_t>(m.rows()) != s.rows ||
        static_cast<std::size_t>(m.cols()) != s.cols)
        throw shape_error("matrix shape does not match dims/partition");
    DenseTensor a(dims);

    std::vector<std::size_t> idx(dims.size(), 0);
    std::size_t row = 0, col = 0;
    const std::size_t total = a.size();
    for (std::size_t flat = 0;; ++flat) {
        a[flat] = m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        if (flat + 1 == total)
            break;
        for (std::size_t ax = dims.size(); ax-- > 0;) {
            ++idx[ax];
            row += s.row_stride[ax];
            col += s.col_stride[ax];
            if (idx[ax] < dims[ax])
                break;
            row -= s.row_stride[ax] * dims[ax];
            col -= s.col_stride[ax] * dims[ax];
            idx[ax] = 0;
        }
    }
    return a;
}

std::vector<double> singular_values(const Matrix& m) {
    if (!m.allFinite())
        throw numeric_error("singular values of a non-finite matrix");
    Vector sv;
    // Jacobi is the most accurate option and cheap for small blocks; fall back
    // to the divide-and-conquer kernel once blocks get big.
    if (std::min(m.rows(), m.cols()) <= 32) {
        Eigen::JacobiSVD<Matrix> svd(m);
        sv = svd.singularValues();
    } else {
        Eigen::BDCSVD<Matrix> svd(m);
        sv = svd.singularValues();
    }
    return {sv.data(), sv.data() + sv.size()};
}

double entropy_of_singular_values(std::span<const double> sv) {
    double top = 0.0;
    for (double s : sv)
        top = std::max(top, s);
    if (top <= 0.0)
        return 0.0;
    const double cutoff = 1e-12 * top;
    double total = 0.0;
    for (double s : sv)
        if (s > cutoff)
            total += s * s;
    if (total <= 0.0)
        return 0.0;
    double h = 0.0;
    for (double s : sv) {
        if (s <= cutoff)
            continue;
        const double rho = (s * s) / total;
        h -= rho * std::log(rho);
    }
    // -0.0 and tiny negative round-off are clamped; entropy is nonnegative.
    return h > 0.0 ? h : 0.0;
}

double entanglement(const DenseTensor& a, const AxisPartition& part) {
    const auto sv = singular_values(matricize(a, part));
    return entropy_of_singular_values(sv);
}

DenseTensor outer_product(const std::vector<Vector>& factors, std::size_t budget) {
    if (factors.empty())
        throw argument_error("outer product needs at least one factor");
    std::vector<std::size_t> dims;
    dims.reserve(factors.size());
    std::size_t total = 1;
    for (const auto& f : factors) {
        if (f.size() == 0)
            throw shape_error("outer product factor must be nonempty");
        dims.push_back(static_cast<std::size_t>(f.size()));
        if (total > budget / dims.back())
            throw capacity_error("outer product exceeds the element budget");
        total *= dims.back();
    }
    DenseTensor out(std::move(dims));
    // Fill by peeling the first factor over progressively longer blocks.
    out[0] = 1.0;
    std::size_t block = 1;
    for (std::size_t ax = factors.size(); ax-- > 0;) {
        const auto& f = factors[ax];
        const std::size_t n = static_cast<std::size_t>(f.size());
        // Expand the current prefix of length `block` into n scaled copies.
        for (std::size_t rep = n; rep-- > 0;)
            for (std::size_t i = block; i-- > 0;)
                out[rep * block + i] = out[i] * f[static_cast<Eigen::Index>(rep)];
        block *= n;
    }
    return out;
}

double inner_product(const DenseTensor& a, const DenseTensor& b) {
    if (a.dims() != b.dims())
        throw shape_error("inner product of tensors with different extents");
    return std::inner_product(a.data(), a.data() + a.size(), b.data(), 0.0);
}

double norm(const DenseTensor& a) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sq += a[i] * a[i];
    return std::sqrt(sq);
}

} // namespace entanglekit
