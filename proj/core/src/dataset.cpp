#include "entanglekit/dataset.hpp"

#include <cmath>
#include <numbers>

#include "entanglekit/partitions.hpp"

namespace entanglekit {

std::size_t Dataset::side() const {
    if (spatial_dim <= 1)
        return n_features;
    // n_features must be an exact P-th power.
    std::size_t s = 1;
    while (true) {
        std::size_t vol = 1;
        for (std::size_t p = 0; p < spatial_dim; ++p)
            vol *= s;
        if (vol == n_features)
            return s;
        if (vol > n_features)
            throw shape_error("feature count is not a P-th power of the grid side");
        ++s;
    }
}

void Dataset::validate() const {
    if (n_features == 0 || feature_dim == 0)
        throw shape_error("dataset needs at least one feature and one component");
    if (spatial_dim == 0)
        throw shape_error("spatial dimension must be >= 1");
    const std::size_t stride = n_features * feature_dim;
    if (values.size() % stride != 0)
        throw shape_error("dataset value buffer is not a whole number of instances");
    if (labeled() && labels.size() != instance_count())
        throw shape_error("label count does not match instance count");
    for (int y : labels)
        if (y != 1 && y != -1)
            throw precondition_error("labels must be +1 or -1");
    if (spatial_dim > 1)
        (void)side(); // throws when the grid does not close
    if (normalized) {
        for (std::size_t m = 0; m < instance_count(); ++m)
            for (std::size_t n = 0; n < n_features; ++n)
                if (std::abs(feature(m, n).norm() - 1.0) > 1e-9)
                    throw precondition_error("dataset flagged normalized has a non-unit feature");
    }
}

Eigen::Vector2d embed_sincos(double x, double theta) {
    const double angle = std::numbers::pi * theta * x;
    return {std::sin(angle), std::cos(angle)};
}

Dataset embed_dataset_sincos(const Dataset& ds, double theta) {
    if (ds.feature_dim != 1)
        throw precondition_error("sine/cosine embedding expects scalar features");
    Dataset out;
    out.n_features = ds.n_features;
    out.feature_dim = 2;
    out.spatial_dim = ds.spatial_dim;
    out.labels = ds.labels;
    out.normalized = true;
    out.original_features = ds.original_features;
    out.values.resize(ds.values.size() * 2);
    for (std::size_t i = 0; i < ds.values.size(); ++i) {
        const auto phi = embed_sincos(ds.values[i], theta);
        out.values[2 * i] = phi[0];
        out.values[2 * i + 1] = phi[1];
    }
    return out;
}

Dataset pad_to_pow2(const Dataset& ds) {
    if (ds.spatial_dim != 1)
        throw precondition_error("padding is defined for one-dimensional feature layouts");
    ds.validate();
    if (is_power_of_two(ds.n_features))
        return ds;
    std::size_t target = 1;
    while (target < ds.n_features)
        target <<= 1;

    Dataset out;
    out.n_features = target;
    out.feature_dim = ds.feature_dim;
    out.spatial_dim = 1;
    out.labels = ds.labels;
    out.normalized = ds.normalized;
    out.original_features = ds.n_features;
    const std::size_t m_count = ds.instance_count();
    out.values.assign(m_count * target * ds.feature_dim, 0.0);
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t n = 0; n < ds.n_features; ++n)
            for (std::size_t d = 0; d < ds.feature_dim; ++d)
                out.value(m, n, d) = ds.value(m, n, d);
        // Padding features are constant: scalar 0 embeds to (0, 1); for
        // vector-valued data use the unit vector on the last component so a
        // normalized dataset stays normalized.
        if (ds.feature_dim > 1)
            for (std::size_t n = ds.n_features; n < target; ++n)
                out.value(m, n, ds.feature_dim - 1) = 1.0;
    }
    return out;
}

} // namespace entanglekit
