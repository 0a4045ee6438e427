#include "entanglekit/synth.hpp"

#include <cmath>

#include "entanglekit/errors.hpp"
#include "entanglekit/partitions.hpp"
#include "entanglekit/rng.hpp"

namespace entanglekit {

namespace {

double sign_label(double x) { return x < 0.0 ? -1.0 : 1.0; }

Dataset make_dataset(std::size_t m, std::size_t n, std::size_t spatial_dim) {
    Dataset ds;
    ds.n_features = n;
    ds.feature_dim = 1;
    ds.spatial_dim = spatial_dim;
    ds.values.assign(m * n, 0.0);
    ds.labels.assign(m, 0.0);
    return ds;
}

// Move feature columns to seeded random positions; group ids travel along.
void scramble_positions(SynthResult& r, std::uint64_t seed) {
    const std::size_t n = r.dataset.n_features;
    std::vector<std::size_t> target(n);
    for (std::size_t f = 0; f < n; ++f)
        target[f] = f;
    rng_engine gen(seed + 0x517CC1B727220A95ull);
    for (std::size_t i = n; i > 1; --i)
        std::swap(target[i - 1], target[uniform_index(gen, i)]);

    Dataset shuffled = r.dataset;
    std::vector<std::size_t> groups(n, 0);
    const std::size_t m_count = r.dataset.instance_count();
    for (std::size_t f = 0; f < n; ++f) {
        groups[target[f]] = r.group_of[f];
        for (std::size_t m = 0; m < m_count; ++m)
            shuffled.value(m, target[f], 0) = r.dataset.value(m, f, 0);
    }
    r.dataset = std::move(shuffled);
    r.group_of = std::move(groups);
}

} // namespace

SynthResult synth_block_pairs(std::size_t n_features, std::size_t m_instances, double rho,
                              std::uint64_t seed, bool shuffle, double value_scale) {
    if (n_features < 2 || n_features % 2 != 0)
        throw argument_error("pair generator needs an even feature count >= 2");
    if (m_instances < 1)
        throw argument_error("at least one instance is required");
    if (!(rho >= 0.0 && rho <= 1.0))
        throw argument_error("pair correlation must lie in [0, 1]");

    const std::size_t pairs = n_features / 2;
    SynthResult r;
    r.dataset = make_dataset(m_instances, n_features, 1);
    r.group_of.resize(n_features);
    for (std::size_t j = 0; j < pairs; ++j)
        r.group_of[2 * j] = r.group_of[2 * j + 1] = j;

    rng_engine gen(seed);
    const double mix = std::sqrt(1.0 - rho * rho);
    for (std::size_t m = 0; m < m_instances; ++m) {
        double latent_sum = 0.0;
        for (std::size_t j = 0; j < pairs; ++j) {
            const double z = normal(gen);
            const double w = normal(gen);
            latent_sum += z;
            r.dataset.value(m, 2 * j, 0) = value_scale * z;
            r.dataset.value(m, 2 * j + 1, 0) = value_scale * (rho * z + mix * w);
        }
        r.dataset.labels[m] = sign_label(latent_sum);
    }
    if (shuffle)
        scramble_positions(r, seed);
    return r;
}

SynthResult synth_grid_quadrants(std::size_t side, std::size_t m_instances, double rho,
                                 std::uint64_t seed, bool shuffle, double value_scale) {
    if (!is_power_of_two(side) || side < 2)
        throw argument_error("grid side must be a power of two >= 2");
    if (m_instances < 1)
        throw argument_error("at least one instance is required");
    if (!(rho >= 0.0 && rho <= 1.0))
        throw argument_error("quadrant correlation must lie in [0, 1]");

    const std::size_t n = side * side;
    const std::size_t half = side / 2;
    SynthResult r;
    r.dataset = make_dataset(m_instances, n, 2);
    r.group_of.resize(n);
    for (std::size_t row = 0; row < side; ++row)
        for (std::size_t col = 0; col < side; ++col)
            r.group_of[row * side + col] = (row / half) * 2 + (col / half);

    rng_engine gen(seed);
    const double mix = std::sqrt(1.0 - rho * rho);
    for (std::size_t m = 0; m < m_instances; ++m) {
        double z[4];
        double latent_sum = 0.0;
        for (double& zg : z) {
            zg = normal(gen);
            latent_sum += zg;
        }
        for (std::size_t f = 0; f < n; ++f) {
            const double w = normal(gen);
            r.dataset.value(m, f, 0) = value_scale * (rho * z[r.group_of[f]] + mix * w);
        }
        r.dataset.labels[m] = sign_label(latent_sum);
    }
    if (shuffle)
        scramble_positions(r, seed);
    return r;
}

SynthResult synth_iid(std::size_t n_features, std::size_t m_instances, std::uint64_t seed,
                      double value_scale) {
    if (n_features < 1)
        throw argument_error("at least one feature is required");
    if (m_instances < 1)
        throw argument_error("at least one instance is required");

    SynthResult r;
    r.dataset = make_dataset(m_instances, n_features, 1);
    r.group_of.resize(n_features);
    for (std::size_t f = 0; f < n_features; ++f)
        r.group_of[f] = f;

    rng_engine gen(seed);
    for (std::size_t m = 0; m < m_instances; ++m) {
        double sum = 0.0;
        for (std::size_t f = 0; f < n_features; ++f) {
            const double x = normal(gen);
            sum += x;
            r.dataset.value(m, f, 0) = value_scale * x;
        }
        r.dataset.labels[m] = sign_label(sum);
    }
    return r;
}

} // namespace entanglekit
