#include "entanglekit/data_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "entanglekit/parallel.hpp"
#include "entanglekit/tree_tn.hpp"

namespace entanglekit {

namespace {

void require_labels(const Dataset& ds) {
    if (!ds.labeled())
        throw precondition_error("this operation needs a labeled dataset");
}

// Eigendecomposition of a PSD Gram matrix with the documented clamping rule.
struct ClampedEig {
    Matrix u;   // columns for the kept (positive) eigenvalues
    Vector s;   // kept eigenvalues, descending
};

ClampedEig clamped_psd_eig(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
    if (eig.info() != Eigen::Success)
        throw numeric_error("Gram eigendecomposition failed");
    const double trace = std::max(0.0, g.trace());
    const double cutoff = 1e-12 * trace;
    const Vector& ev = eig.eigenvalues(); // ascending
    // The Gram matrices are PSD by construction; round-off may dip slightly
    // below zero.  Anything clamped must be tiny relative to the trace.
    if (ev.size() > 0 && ev[0] < -1e-8 * trace)
        throw numeric_error("Gram matrix is far from positive semidefinite");

    ClampedEig out;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = ev.size(); i-- > 0;)
        if (ev[i] > cutoff)
            keep.push_back(i); // descending order
    out.u.resize(g.rows(), static_cast<Eigen::Index>(keep.size()));
    out.s.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.u.col(static_cast<Eigen::Index>(k)) = eig.eigenvectors().col(keep[k]);
        out.s[static_cast<Eigen::Index>(k)] = ev[keep[k]];
    }
    return out;
}

} // namespace

DenseTensor empirical_data_tensor_dense(const Dataset& ds, std::size_t budget) {
    ds.validate();
    require_labels(ds);
    const std::size_t m_count = ds.instance_count();
    if (m_count == 0)
        throw precondition_error("empty dataset");
    const std::size_t n = ds.n_features;

    // Axis a holds feature map.inverse[a]; identity for spatial_dim == 1.
    std::vector<std::size_t> axis_to_feature(n);
    if (ds.spatial_dim > 1) {
        const auto map = build_compatible_map(ds.side(), ds.spatial_dim);
        axis_to_feature = map.inverse;
    } else {
        for (std::size_t a = 0; a < n; ++a)
            axis_to_feature[a] = a;
    }

    std::size_t total = 1;
    for (std::size_t a = 0; a < n; ++a) {
        if (total > budget / ds.feature_dim)
            throw capacity_error("empirical data tensor exceeds the element budget");
        total *= ds.feature_dim;
    }

    DenseTensor out(std::vector<std::size_t>(n, ds.feature_dim));
    std::vector<std::size_t> idx(n, 0);
    for (std::size_t m = 0; m < m_count; ++m) {
        const double y = static_cast<double>(ds.labels[m]);
        // Accumulate y/M * outer product, walking the flat index as an odometer.
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t flat = 0;; ++flat) {
            double v = y;
            for (std::size_t a = 0; a < n; ++a)
                v *= ds.value(m, axis_to_feature[a], idx[a]);
            out[flat] += v;
            bool done = true;
            for (std::size_t a = n; a-- > 0;) {
                if (++idx[a] < ds.feature_dim) {
                    done = false;
                    break;
                }
                idx[a] = 0;
            }
            if (done)
                break;
        }
    }
    const double inv_m = 1.0 / static_cast<double>(m_count);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] *= inv_m;
    return out;
}

double entanglement_gram(const Dataset& ds, std::span<const std::size_t> feature_subset) {
    ds.validate();
    require_labels(ds);
    const std::size_t m_count = ds.instance_count();
    const std::size_t n = ds.n_features;
    if (feature_subset.empty() || feature_subset.size() >= n)
        throw partition_error("feature subset must be nonempty and proper");
    std::vector<bool> in_subset(n, false);
    for (std::size_t f : feature_subset) {
        if (f >= n)
            throw partition_error("feature index out of range");
        if (in_subset[f])
            throw partition_error("feature subset contains a duplicate");
        in_subset[f] = true;
    }

    const Eigen::Index m = static_cast<Eigen::Index>(m_count);
    Matrix g_in = Matrix::Ones(m, m);   // labels folded in below
    Matrix g_out = Matrix::Ones(m, m);
    for (std::size_t f = 0; f < n; ++f) {
        Matrix& g = in_subset[f] ? g_in : g_out;
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = i; j < m; ++j) {
                const double dot = ds.feature(static_cast<std::size_t>(i), f)
                                       .dot(ds.feature(static_cast<std::size_t>(j), f));
                g(i, j) *= dot;
                if (j != i)
                    g(j, i) = g(i, j);
            }
        }
    }
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            g_in(i, j) *= static_cast<double>(ds.labels[static_cast<std::size_t>(i)]) *
                          static_cast<double>(ds.labels[static_cast<std::size_t>(j)]);

    const auto ein = clamped_psd_eig(g_in);
    const auto eout = clamped_psd_eig(g_out);
    if (ein.s.size() == 0 || eout.s.size() == 0)
        return 0.0; // one side vanished: the data tensor is zero

    const Matrix q = ein.s.cwiseSqrt().asDiagonal() * (ein.u.transpose() * eout.u) *
                     eout.s.cwiseSqrt().asDiagonal();
    if (q.norm() == 0.0)
        return 0.0;
    Vector sv;
    if (std::min(q.rows(), q.cols()) <= 32) {
        Eigen::JacobiSVD<Matrix> svd(q);
        sv = svd.singularValues();
    } else {
        Eigen::BDCSVD<Matrix> svd(q);
        sv = svd.singularValues();
    }
    return entropy_of_singular_values({sv.data(), static_cast<std::size_t>(sv.size())});
}

double entanglement_gram(const Dataset& ds, const AxisPartition& part,
                         const CompatibleMap& map) {
    if (part.n_axes != ds.n_features || map.axis_count() != ds.n_features)
        throw partition_error("partition/map size does not match the dataset");
    std::vector<std::size_t> features;
    features.reserve(part.subset.size());
    for (std::size_t ax : part.subset)
        features.push_back(map.inverse[ax]);
    std::sort(features.begin(), features.end());
    return entanglement_gram(ds, features);
}

double entanglement_gram(const Dataset& ds, const CanonicalPartition& part,
                         const CompatibleMap& map) {
    if (part.degenerate)
        throw partition_error("level-0 canonical split has no entanglement");
    const auto features = part.features(map);
    return entanglement_gram(ds, features);
}

double average_canonical_entanglement(const Dataset& ds, std::size_t level_lo,
                                      std::size_t level_hi) {
    ds.validate();
    const std::size_t side = ds.side();
    if (!is_power_of_two(side) || side < 2)
        throw precondition_error("canonical averaging needs a power-of-two grid side");
    const std::size_t levels = log2_exact(side);
    if (level_lo < 1 || level_lo > level_hi || level_hi > levels)
        throw argument_error("bad canonical level range");

    const auto map = build_compatible_map(side, ds.spatial_dim);
    const auto parts = canonical_partitions(side, ds.spatial_dim, level_lo, level_hi);
    std::vector<double> qe(parts.size());
    parallel_for(parts.size(),
                 [&](std::size_t i) { qe[i] = entanglement_gram(ds, parts[i], map); });
    double sum = 0.0;
    for (double v : qe)
        sum += v;
    return sum / static_cast<double>(parts.size());
}

std::uint64_t sample_size_bound(double delta, double gamma, double pop_norm_lower,
                                double max_logD) {
    if (!(delta > 0.0) || delta >= 1.0)
        throw argument_error("delta must lie in (0, 1)");
    if (!(gamma > 0.0) || !(pop_norm_lower > 0.0) || !(max_logD > 0.0))
        throw argument_error("gamma, pop_norm_lower, max_logD must be positive");
    const double raw = 128.0 * std::log(2.0 / delta) * std::pow(max_logD, 4) /
                       (pop_norm_lower * pop_norm_lower * std::pow(gamma, 4));
    // Ceiling with a hair of tolerance so exactly-integer intents (2/delta a
    // power of e, unit parameters) do not round up on the last ulp.
    const double floor_v = std::floor(raw);
    const double frac = raw - floor_v;
    double v = (frac <= 1e-9 * std::max(1.0, raw)) ? floor_v : floor_v + 1.0;
    if (v < 1.0)
        v = 1.0;
    return static_cast<std::uint64_t>(v);
}

double suboptimality_upper_bound(const Dataset& ds, std::size_t width, std::size_t budget) {
    DenseTensor dt = empirical_data_tensor_dense(ds, budget);
    const double nrm = norm(dt);
    if (nrm == 0.0)
        throw degenerate_error("empirical data tensor is zero");
    for (std::size_t i = 0; i < dt.size(); ++i)
        dt[i] /= nrm;

    const std::size_t arity = std::size_t{1} << ds.spatial_dim;
    auto fit = fit_hierarchical(dt, width, arity, budget);
    DenseTensor w = fit.network.contract_full(budget);
    const double wn = norm(w);
    if (wn == 0.0)
        return 2.0; // fit collapsed; 2 is the universal bound between unit tensors
    double err_sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = w[i] / wn - dt[i];
        err_sq += d * d;
    }
    return std::sqrt(err_sq);
}

} // namespace entanglekit
