#pragma once

#include <cstdint>
#include <vector>

#include "entanglekit/dataset.hpp"

namespace entanglekit {

// Scale applied to raw synthetic feature values so the default sine-cosine
// embedding spreads them over a useful arc of the circle.
inline constexpr double kDefaultValueScale = 4.0;

// A generated dataset together with its planted structure: group_of[f] is the
// latent-group id of feature column f (as stored in the dataset, i.e. after
// any position scrambling).
struct SynthResult {
    Dataset dataset;
    std::vector<std::size_t> group_of;
};

// Features drawn in correlated pairs: the two members of pair j have Pearson
// correlation rho, different pairs are independent, and the label is the sign
// of the sum of the pair latents.  With shuffle = true the columns are placed
// at seeded random positions (the planted pairing is recorded in group_of).
SynthResult synth_block_pairs(std::size_t n_features, std::size_t m_instances, double rho,
                              std::uint64_t seed, bool shuffle = true,
                              double value_scale = kDefaultValueScale);

// Two-dimensional analog: a side x side grid (side a power of two >= 2) whose
// four quadrants each share one latent factor; feature f in quadrant g is
// rho * z_g + sqrt(1 - rho^2) * noise.  Labels follow the sign of the latent
// sum.  With shuffle = true grid positions are scrambled.
SynthResult synth_grid_quadrants(std::size_t side, std::size_t m_instances, double rho,
                                 std::uint64_t seed, bool shuffle = true,
                                 double value_scale = kDefaultValueScale);

// Independent standard-normal features; every feature is its own group.
// Labels follow the sign of the feature sum.
SynthResult synth_iid(std::size_t n_features, std::size_t m_instances, std::uint64_t seed,
                      double value_scale = kDefaultValueScale);

} // namespace entanglekit
