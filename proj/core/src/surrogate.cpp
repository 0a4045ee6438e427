#include "entanglekit/surrogate.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "entanglekit/parallel.hpp"
#include "entanglekit/partitions.hpp"

namespace entanglekit {

namespace {

// Covariance of feature a against feature b (D x D, 1/M normalization).
Matrix cross_covariance(const Dataset& ds, std::size_t a, std::size_t b) {
    const std::size_t m_count = ds.instance_count();
    const Eigen::Index d = static_cast<Eigen::Index>(ds.feature_dim);
    Vector mean_a = Vector::Zero(d), mean_b = Vector::Zero(d);
    for (std::size_t m = 0; m < m_count; ++m) {
        mean_a += ds.feature(m, a);
        mean_b += ds.feature(m, b);
    }
    mean_a /= static_cast<double>(m_count);
    mean_b /= static_cast<double>(m_count);
    Matrix c = Matrix::Zero(d, d);
    for (std::size_t m = 0; m < m_count; ++m)
        c += (ds.feature(m, a) - mean_a) * (ds.feature(m, b) - mean_b).transpose();
    return c / static_cast<double>(m_count);
}

// Symmetric PSD principal square root via eigendecomposition; eigenvalues
// below 1e-12 * trace are treated as zero.
Matrix psd_sqrt(const Matrix& c) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    if (eig.info() != Eigen::Success)
        throw numeric_error("covariance eigendecomposition failed");
    const double cutoff = 1e-12 * std::max(0.0, c.trace());
    Vector root = eig.eigenvalues();
    for (Eigen::Index i = 0; i < root.size(); ++i)
        root[i] = root[i] > cutoff ? std::sqrt(root[i]) : 0.0;
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double pearson_from_covs(const Matrix& ca, const Matrix& cb, const Matrix& cab) {
    // tr((C_a C_b)^(1/2)) = tr((C_a^(1/2) C_b C_a^(1/2))^(1/2)): the inner
    // matrix is symmetric PSD, so the principal root is well defined even
    // though C_a C_b itself is not symmetric.
    const Matrix ra = psd_sqrt(ca);
    const Matrix inner = ra * cb * ra;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(inner);
    if (eig.info() != Eigen::Success)
        throw numeric_error("correlation eigendecomposition failed");
    const double cutoff = 1e-12 * std::max(0.0, inner.trace());
    double denom = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double v = eig.eigenvalues()[i];
        if (v > cutoff)
            denom += std::sqrt(v);
    }
    if (denom <= 0.0)
        throw degenerate_error("correlation denominator vanished");
    return cab.trace() / denom;
}

void check_feature_index(const Dataset& ds, std::size_t f) {
    if (f >= ds.n_features)
        throw partition_error("feature index out of range");
}

} // namespace

double multivariate_pearson(const Dataset& ds, std::size_t a, std::size_t b) {
    ds.validate();
    check_feature_index(ds, a);
    check_feature_index(ds, b);
    if (ds.instance_count() < 2)
        throw precondition_error("correlation needs at least two instances");
    const Matrix ca = cross_covariance(ds, a, a);
    const Matrix cb = cross_covariance(ds, b, b);
    if (ca.trace() <= 0.0 || cb.trace() <= 0.0)
        throw degenerate_error("constant feature has no correlation");
    return pearson_from_covs(ca, cb, cross_covariance(ds, a, b));
}

CorrelationGraph build_correlation_graph(const Dataset& ds, bool embedded, double theta) {
    const Dataset* src = &ds;
    Dataset storage;
    if (embedded) {
        storage = embed_dataset_sincos(ds, theta);
        src = &storage;
    }
    src->validate();
    if (src->instance_count() < 2)
        throw precondition_error("correlation graph needs at least two instances");
    const std::size_t n = src->n_features;

    CorrelationGraph graph;
    graph.weights = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    graph.masked.assign(n, false);

    std::vector<Matrix> auto_cov(n);
    for (std::size_t f = 0; f < n; ++f) {
        auto_cov[f] = cross_covariance(*src, f, f);
        graph.masked[f] = auto_cov[f].trace() <= 0.0;
    }

    // Upper triangle, one row per task; masked features keep weight 0.
    parallel_for(n, [&](std::size_t a) {
        if (graph.masked[a])
            return;
        for (std::size_t b = a + 1; b < n; ++b) {
            if (graph.masked[b])
                continue;
            const double p =
                pearson_from_covs(auto_cov[a], auto_cov[b], cross_covariance(*src, a, b));
            graph.weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = p;
            graph.weights(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = p;
        }
    });
    return graph;
}

double surrogate_entanglement(const CorrelationGraph& graph,
                              std::span<const std::size_t> subset) {
    const std::size_t n = graph.size();
    std::vector<bool> in_subset(n, false);
    for (std::size_t f : subset) {
        if (f >= n)
            throw partition_error("feature index out of range");
        in_subset[f] = true;
    }
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        if (!in_subset[a])
            continue;
        for (std::size_t b = 0; b < n; ++b)
            if (!in_subset[b])
                total += graph.weights(static_cast<Eigen::Index>(a),
                                       static_cast<Eigen::Index>(b));
    }
    return total;
}

double surrogate_entanglement(const Dataset& ds, std::span<const std::size_t> subset) {
    return surrogate_entanglement(build_correlation_graph(ds), subset);
}

double cut_weight(const CorrelationGraph& graph, std::span<const std::size_t> subset,
                  std::span<const std::size_t> working) {
    const std::size_t n = graph.size();
    std::vector<int> side(n, 0); // 0 = outside working, 1 = working, 2 = subset
    for (std::size_t v : working) {
        if (v >= n)
            throw partition_error("vertex index out of range");
        side[v] = 1;
    }
    for (std::size_t v : subset) {
        if (v >= n || side[v] == 0)
            throw partition_error("subset must lie inside the working set");
        side[v] = 2;
    }
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        if (side[a] != 2)
            continue;
        for (std::size_t b = 0; b < n; ++b)
            if (side[b] == 1)
                total += graph.weights(static_cast<Eigen::Index>(a),
                                       static_cast<Eigen::Index>(b));
    }
    return total;
}

double average_canonical_surrogate(const CorrelationGraph& graph, std::size_t side,
                                   std::size_t spatial_dim, std::size_t level_lo,
                                   std::size_t level_hi) {
    const std::size_t levels = log2_exact(side);
    if (level_lo < 1 || level_lo > level_hi || level_hi > levels)
        throw argument_error("bad canonical level range");
    const auto map = build_compatible_map(side, spatial_dim);
    if (map.axis_count() != graph.size())
        throw shape_error("graph size does not match the grid");
    const auto parts = canonical_partitions(side, spatial_dim, level_lo, level_hi);
    double sum = 0.0;
    for (const auto& cp : parts)
        sum += surrogate_entanglement(graph, cp.features(map));
    return sum / static_cast<double>(parts.size());
}

DenseTensor graph_to_tensor(const CorrelationGraph& graph) {
    const std::size_t n = graph.size();
    DenseTensor out({n, n});
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            out[a * n + b] =
                graph.weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    return out;
}

} // namespace entanglekit
