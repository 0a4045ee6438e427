#include "entanglekit/tree_tn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/SVD>
#include <json.hpp>

#include "entanglekit/rng.hpp"
#include "entanglekit/tensor_io.hpp"

namespace entanglekit {

namespace {

// F must equal arity^L with L >= 1; returns L.
std::size_t tree_height(std::size_t leaf_count, std::size_t arity) {
    std::size_t l = 0, v = 1;
    while (v < leaf_count) {
        v *= arity;
        ++l;
    }
    if (v != leaf_count || l == 0)
        throw shape_error("leaf count is not a positive power of the arity");
    return l;
}

// Contracts the middle mode of a (front, mid, back) row-major buffer with
// w (out_mid x mid): out[q, o, b] = sum_i in[q, i, b] * w(o, i).
std::vector<double> fold_middle(const std::vector<double>& in, std::size_t front,
                                std::size_t mid, std::size_t back, const Matrix& w,
                                std::size_t budget) {
    const std::size_t out_mid = static_cast<std::size_t>(w.rows());
    if (front * mid * back != in.size())
        throw shape_error("fold: buffer does not factor as front*mid*back");
    if (static_cast<std::size_t>(w.cols()) != mid)
        throw shape_error("fold: contraction extents differ");
    if (out_mid != 0 && front != 0 && back != 0) {
        const std::size_t out_size = front * out_mid * back;
        if (out_size / out_mid / back != front || out_size > budget)
            throw capacity_error("contraction intermediate exceeds the element budget");
    }
    std::vector<double> out(front * out_mid * back, 0.0);
    for (std::size_t q = 0; q < front; ++q) {
        for (std::size_t o = 0; o < out_mid; ++o) {
            const std::size_t base_out = (q * out_mid + o) * back;
            for (std::size_t i = 0; i < mid; ++i) {
                const double wv = w(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
                if (wv == 0.0)
                    continue;
                const std::size_t base_in = (q * mid + i) * back;
                for (std::size_t b = 0; b < back; ++b)
                    out[base_out + b] += wv * in[base_in + b];
            }
        }
    }
    return out;
}

std::vector<double> matrix_to_rowmajor(const Matrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.rows() * m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    return out;
}

// Thin left singular basis, zero-padded to exactly `width` columns.
Matrix truncated_basis(const Matrix& thin_u, std::size_t width) {
    Matrix out = Matrix::Zero(thin_u.rows(), static_cast<Eigen::Index>(width));
    const Eigen::Index keep = std::min<Eigen::Index>(thin_u.cols(),
                                                     static_cast<Eigen::Index>(width));
    out.leftCols(keep) = thin_u.leftCols(keep);
    return out;
}

struct ThinSVD {
    Matrix u, v;
    Vector sv;
};

ThinSVD thin_svd(const Matrix& m) {
    if (std::min(m.rows(), m.cols()) <= 32) {
        Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        return {svd.matrixU(), svd.matrixV(), svd.singularValues()};
    }
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

} // namespace

TreeTensorNetwork::TreeTensorNetwork(std::vector<std::size_t> leaf_dims, std::size_t width,
                                     std::size_t spatial_dim)
    : width_(width), spatial_dim_(spatial_dim), leaf_dims_(std::move(leaf_dims)) {
    if (spatial_dim_ < 1 || spatial_dim_ > 20)
        throw argument_error("spatial dimension out of range");
    if (width_ < 1)
        throw argument_error("network width must be >= 1");
    arity_ = std::size_t{1} << spatial_dim_;
    for (std::size_t d : leaf_dims_)
        if (d == 0)
            throw shape_error("leaf dimension must be >= 1");
    const std::size_t levels = tree_height(leaf_dims_.size(), arity_);

    levels_.resize(levels + 1);
    levels_[0].reserve(leaf_dims_.size());
    for (std::size_t d : leaf_dims_)
        levels_[0].emplace_back(Matrix::Zero(static_cast<Eigen::Index>(d),
                                             static_cast<Eigen::Index>(width_)));
    std::size_t r_pow = 1;
    for (std::size_t i = 0; i < arity_; ++i)
        r_pow *= width_;
    std::size_t count = leaf_dims_.size();
    for (std::size_t h = 1; h <= levels; ++h) {
        count /= arity_;
        const std::size_t parent = (h == levels) ? 1 : width_;
        levels_[h].assign(count, Matrix::Zero(static_cast<Eigen::Index>(r_pow),
                                              static_cast<Eigen::Index>(parent)));
    }
}

TreeTensorNetwork TreeTensorNetwork::random(std::vector<std::size_t> leaf_dims,
                                            std::size_t width, std::size_t spatial_dim,
                                            std::uint64_t seed) {
    TreeTensorNetwork tn(std::move(leaf_dims), width, spatial_dim);
    rng_engine gen(seed);
    for (auto& level : tn.levels_)
        for (auto& m : level)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    m(r, c) = normal(gen);
    return tn;
}

void TreeTensorNetwork::validate() const {
    std::size_t r_pow = 1;
    for (std::size_t i = 0; i < arity_; ++i)
        r_pow *= width_;
    for (std::size_t n = 0; n < leaf_count(); ++n) {
        const auto& m = levels_[0][n];
        if (static_cast<std::size_t>(m.rows()) != leaf_dims_[n] ||
            static_cast<std::size_t>(m.cols()) != width_)
            throw shape_error("leaf matrix shape mismatch");
    }
    for (std::size_t h = 1; h <= height(); ++h) {
        const std::size_t parent = (h == height()) ? 1 : width_;
        for (const auto& m : levels_[h])
            if (static_cast<std::size_t>(m.rows()) != r_pow ||
                static_cast<std::size_t>(m.cols()) != parent)
                throw shape_error("transfer matrix shape mismatch");
    }
}

DenseTensor TreeTensorNetwork::contract_full(std::size_t budget) const {
    std::size_t total = 1;
    for (std::size_t d : leaf_dims_) {
        if (total > budget / d)
            throw capacity_error("contracted tensor exceeds the element budget");
        total *= d;
    }

    // Bottom-up: each node accumulates the row-major (rows x parent) matrix
    // of the sub-network it roots, rows spanning its descendant axes.
    struct Base {
        std::vector<double> flat;
        std::size_t rows = 1, cols = 1;
    };
    std::vector<Base> current(leaf_count());
    for (std::size_t n = 0; n < leaf_count(); ++n)
        current[n] = {matrix_to_rowmajor(levels_[0][n]), leaf_dims_[n], width_};

    for (std::size_t h = 1; h <= height(); ++h) {
        std::vector<Base> next(levels_[h].size());
        for (std::size_t j = 0; j < levels_[h].size(); ++j) {
            const std::size_t parent_cols = (h == height()) ? 1 : width_;
            Base acc;
            acc.flat = matrix_to_rowmajor(levels_[h][j]);
            acc.rows = 1; // accumulated child-row block so far (leading index)
            acc.cols = parent_cols;
            // Fold children from last to first so finished child rows gather
            // behind the pending width indices.
            std::size_t pending = arity_;
            std::size_t back = parent_cols;
            std::size_t done_rows = 1;
            for (std::size_t c = arity_; c-- > 0;) {
                const Base& child = current[j * arity_ + c];
                // child.flat is (child.rows x width_) row-major; we contract
                // the width index, leaving child.rows in place.
                Matrix w(static_cast<Eigen::Index>(child.rows),
                         static_cast<Eigen::Index>(width_));
                for (std::size_t r = 0; r < child.rows; ++r)
                    for (std::size_t k = 0; k < width_; ++k)
                        w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                            child.flat[r * width_ + k];
                std::size_t front = 1;
                for (std::size_t i = 0; i + 1 < pending; ++i)
                    front *= width_;
                acc.flat = fold_middle(acc.flat, front, width_, back, w, budget);
                back *= child.rows;
                done_rows *= child.rows;
                --pending;
            }
            acc.rows = done_rows;
            next[j] = std::move(acc);
        }
        current = std::move(next);
    }

    return DenseTensor(leaf_dims_, std::move(current[0].flat));
}

double TreeTensorNetwork::forward(const std::vector<Vector>& instance) const {
    if (instance.size() != leaf_count())
        throw shape_error("forward pass needs one vector per leaf");
    for (std::size_t n = 0; n < leaf_count(); ++n)
        if (static_cast<std::size_t>(instance[n].size()) != leaf_dims_[n])
            throw shape_error("forward input length mismatch");

    std::vector<std::vector<double>> current(leaf_count());
    for (std::size_t n = 0; n < leaf_count(); ++n) {
        const Vector v = levels_[0][n].transpose() * instance[n];
        current[n].assign(v.data(), v.data() + v.size());
    }
    for (std::size_t h = 1; h <= height(); ++h) {
        std::vector<std::vector<double>> next(levels_[h].size());
        for (std::size_t j = 0; j < levels_[h].size(); ++j) {
            const std::size_t parent_cols = (h == height()) ? 1 : width_;
            std::vector<double> acc = matrix_to_rowmajor(levels_[h][j]);
            std::size_t pending = arity_;
            const std::size_t back = parent_cols;
            for (std::size_t c = arity_; c-- > 0;) {
                Matrix w(1, static_cast<Eigen::Index>(width_));
                for (std::size_t k = 0; k < width_; ++k)
                    w(0, static_cast<Eigen::Index>(k)) = current[j * arity_ + c][k];
                std::size_t front = 1;
                for (std::size_t i = 0; i + 1 < pending; ++i)
                    front *= width_;
                acc = fold_middle(acc, front, width_, back, w, kDefaultElementBudget);
                --pending;
            }
            next[j] = std::move(acc);
        }
        current = std::move(next);
    }
    return current[0][0];
}

void TreeTensorNetwork::scale(double c) {
    levels_.back()[0] *= c;
}

// ---------------------------------------------------------------------------
// Hierarchical fit.
// ---------------------------------------------------------------------------

FitResult fit_hierarchical(const DenseTensor& target, std::size_t width,
                           const CompatibleMap& map, std::size_t budget) {
    if (map.axis_count() != target.ndim())
        throw shape_error("map axis count does not match the target tensor");
    return fit_hierarchical(target, width, std::size_t{1} << map.dim, budget);
}

FitResult fit_hierarchical(const DenseTensor& target, std::size_t width, std::size_t arity,
                           std::size_t budget) {
    if (width < 1)
        throw argument_error("fit width must be >= 1");
    if (!is_power_of_two(arity) || arity < 2)
        throw argument_error("arity must be a power of two >= 2");
    const std::size_t spatial = log2_exact(arity);
    const std::size_t f = target.ndim();
    const std::size_t levels = tree_height(f, arity);
    if (norm(target) == 0.0)
        throw degenerate_error("cannot fit the zero tensor");

    // Left singular bases of the canonical interval matricizations, levels
    // 1..L, zero-padded to exactly `width` columns.
    std::vector<std::vector<Matrix>> bases(levels + 1);
    for (std::size_t l = 1; l <= levels; ++l) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < l; ++i)
            count *= arity;
        const std::size_t span = f / count;
        bases[l].resize(count);
        if (l == 1 && arity == 2) {
            // Use one SVD for both root children: projecting rows onto the
            // left basis and columns onto the right basis of the same
            // matricization is a plain best rank-R truncation, which is what
            // makes the root level cost a single tail in the error budget.
            std::vector<std::size_t> subset(span);
            std::iota(subset.begin(), subset.end(), std::size_t{0});
            const auto svd = thin_svd(matricize(target, AxisPartition(f, subset)));
            bases[1][0] = truncated_basis(svd.u, width);
            bases[1][1] = truncated_basis(svd.v, width);
            continue;
        }
        for (std::size_t j = 0; j < count; ++j) {
            std::vector<std::size_t> subset(span);
            std::iota(subset.begin(), subset.end(), j * span);
            const auto svd = thin_svd(matricize(target, AxisPartition(f, subset)));
            bases[l][j] = truncated_basis(svd.u, width);
        }
    }

    TreeTensorNetwork tn(target.dims(), width, spatial);
    for (std::size_t n = 0; n < f; ++n)
        tn.node(0, n) = bases[levels][n];

    // Transfer at height h realizes the change of basis between subset level
    // l = L - h and its children at level l + 1:  T = (kron of child bases)^T U.
    for (std::size_t h = 1; h <= levels; ++h) {
        const std::size_t l = levels - h;
        const std::size_t node_count = tn.nodes_at(h);
        for (std::size_t j = 0; j < node_count; ++j) {
            std::vector<double> flat;
            std::size_t front_rows; // row count of the folded buffer's parent part
            std::size_t cols;
            if (l == 0) {
                flat.assign(target.data(), target.data() + target.size());
                front_rows = target.size();
                cols = 1;
            } else {
                flat = matrix_to_rowmajor(bases[l][j]);
                front_rows = static_cast<std::size_t>(bases[l][j].rows());
                cols = width;
            }
            // Fold each child's basis transpose over its row block, last
            // child first, so the produced width indices stack in child order
            // ahead of the parent column index.
            std::size_t back = cols;
            std::size_t remaining = front_rows;
            for (std::size_t c = arity; c-- > 0;) {
                const Matrix& u = bases[l + 1][j * arity + c];
                const std::size_t child_rows = static_cast<std::size_t>(u.rows());
                remaining /= child_rows;
                flat = fold_middle(flat, remaining, child_rows, back,
                                   Matrix(u.transpose()), budget);
                back *= width;
            }
            // flat is now (width^arity x parent_cols) row-major.
            Matrix t(static_cast<Eigen::Index>(flat.size() / cols),
                     static_cast<Eigen::Index>(cols));
            for (Eigen::Index r = 0; r < t.rows(); ++r)
                for (Eigen::Index cc = 0; cc < t.cols(); ++cc)
                    t(r, cc) = flat[static_cast<std::size_t>(r) * cols +
                                    static_cast<std::size_t>(cc)];
            tn.node(h, j) = std::move(t);
        }
    }

    FitResult result{std::move(tn), 0.0};
    const DenseTensor w = result.network.contract_full(budget);
    double err_sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = w[i] - target[i];
        err_sq += d * d;
    }
    result.achieved_error = std::sqrt(err_sq);
    return result;
}

double truncation_tail(const DenseTensor& a, const AxisPartition& part, std::size_t width) {
    const auto sv = singular_values(matricize(a, part));
    double sq = 0.0;
    for (std::size_t d = width; d < sv.size(); ++d)
        sq += sv[d] * sv[d];
    return std::sqrt(sq);
}

BoundReport check_necessary_bound(const DenseTensor& a, std::size_t width, double eps,
                                  const AxisPartition& part) {
    if (width < 1)
        throw argument_error("width must be >= 1");
    const double nrm = norm(a);
    if (eps < 0.0 || eps > nrm / 4.0)
        throw argument_error("eps must lie in [0, ||A||/4]");
    const double ratio = nrm > 0.0 ? eps / nrm : 0.0;

    double rows = 1.0, cols = 1.0;
    {
        std::vector<bool> in_subset(a.ndim(), false);
        for (std::size_t ax : part.subset)
            in_subset[ax] = true;
        for (std::size_t ax = 0; ax < a.ndim(); ++ax)
            (in_subset[ax] ? rows : cols) *= static_cast<double>(a.dims()[ax]);
    }

    BoundReport report;
    report.d_k = std::min(rows, cols);
    report.lhs = entanglement(a, part);
    report.rhs = std::log(static_cast<double>(width)) +
                 2.0 * ratio * std::log(report.d_k) + 2.0 * std::sqrt(2.0 * ratio);
    report.holds = report.lhs <= report.rhs;
    return report;
}

SufficiencyReport check_sufficient_condition(const DenseTensor& a, std::size_t width,
                                             double eps, std::size_t spatial_dim,
                                             std::size_t budget) {
    if (width < 1)
        throw argument_error("width must be >= 1");
    if (eps < 0.0)
        throw argument_error("eps must be >= 0");
    const double nrm = norm(a);
    if (nrm == 0.0)
        throw degenerate_error("sufficiency check on the zero tensor");
    const std::size_t arity = std::size_t{1} << spatial_dim;
    const std::size_t f = a.ndim();
    const std::size_t levels = tree_height(f, arity);
    const std::size_t side = std::size_t{1} << levels;

    SufficiencyReport report;
    report.threshold = eps * eps / ((2.0 * static_cast<double>(f) - 3.0) * nrm * nrm) *
                       std::log(static_cast<double>(width));
    report.condition_holds = true;
    for (const auto& cp : canonical_partitions(side, spatial_dim, 1, levels)) {
        SufficiencyReport::Entry e;
        e.qe = entanglement(a, cp.axis_partition());
        e.margin = report.threshold - e.qe;
        if (e.margin < 0.0)
            report.condition_holds = false;
        e.partition = cp;
        report.entries.push_back(std::move(e));
    }
    if (report.condition_holds) {
        auto fit = fit_hierarchical(a, width, arity, budget);
        report.fit_ran = true;
        report.achieved_error = fit.achieved_error;
        report.fit_within_eps = fit.achieved_error <= eps + 1e-12 * nrm;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

void save_network(const std::string& path, const TreeTensorNetwork& tn) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw error("cannot open '" + path + "' for writing");

    nlohmann::ordered_json header;
    header["N"] = std::size_t{1} << tn.height();
    header["P"] = tn.spatial_dim();
    header["R"] = tn.width();
    header["dims"] = tn.leaf_dims();
    os << header.dump() << '\n';

    // Breadth-first, root first.  Node payloads are the row-major
    // (children..., parent) tensors.
    for (std::size_t h = tn.height() + 1; h-- > 0;) {
        for (std::size_t j = 0; j < tn.nodes_at(h); ++j) {
            const Matrix& m = tn.node(h, j);
            std::vector<std::size_t> dims;
            if (h == 0) {
                dims = {static_cast<std::size_t>(m.rows()),
                        static_cast<std::size_t>(m.cols())};
            } else {
                dims.assign(tn.arity(), tn.width());
                dims.push_back(static_cast<std::size_t>(m.cols()));
            }
            DenseTensor node(dims, matrix_to_rowmajor(m));
            write_tensor(os, node);
        }
    }
    if (!os)
        throw error("network write failed");
}

TreeTensorNetwork load_network(const std::string& path, std::size_t budget) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw error("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(is, line))
        throw parse_error("missing network header", 1);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(std::string("bad network header: ") + e.what(), 1);
    }
    if (!header.contains("N") || !header.contains("P") || !header.contains("R") ||
        !header.contains("dims"))
        throw parse_error("network header must carry N, P, R, dims", 1);

    const auto side = header["N"].get<std::size_t>();
    const auto spatial = header["P"].get<std::size_t>();
    const auto width = header["R"].get<std::size_t>();
    const auto dims = header["dims"].get<std::vector<std::size_t>>();
    if (!is_power_of_two(side) || side < 2)
        throw parse_error("network header: N must be a power of two >= 2", 1);

    TreeTensorNetwork tn(dims, width, spatial);
    if ((std::size_t{1} << tn.height()) != side)
        throw parse_error("network header: dims do not match N and P", 1);

    for (std::size_t h = tn.height() + 1; h-- > 0;) {
        for (std::size_t j = 0; j < tn.nodes_at(h); ++j) {
            const DenseTensor node = read_tensor(is, budget);
            Matrix& m = tn.node(h, j);
            const std::size_t rows = static_cast<std::size_t>(m.rows());
            const std::size_t cols = static_cast<std::size_t>(m.cols());
            if (node.size() != rows * cols)
                throw parse_error("network node payload has the wrong size");
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        node[r * cols + c];
        }
    }
    tn.validate();
    return tn;
}

} // namespace entanglekit
