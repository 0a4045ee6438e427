#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "entanglekit/dataset.hpp"
#include "entanglekit/surrogate.hpp"

namespace entanglekit {

// Default number of random restarts for the local-search partitioner.
inline constexpr std::size_t kDefaultRestarts = 8;

// Largest working sets the exhaustive modes accept.
inline constexpr std::size_t kExactCutLimit = 12;     // balanced bipartition
inline constexpr std::size_t kExactPow2CutLimit = 8;  // 2^P-way partition

// ---------------------------------------------------------------------------
// CutSolution: a balanced split of a working vertex set into equal parts.
//
// parts are each sorted and ordered by their smallest member (so the part
// containing the smallest vertex comes first); cut_weight is the total
// weight crossing between different parts inside the working set; objective
// is the average surrogate entanglement of the parts with respect to the
// full graph, which differs from cut_weight only by a constant independent
// of the split.  improvement holds the cut after each local-search pass of
// the winning restart (nonincreasing).
// ---------------------------------------------------------------------------
struct CutSolution {
    std::vector<std::vector<std::size_t>> parts;
    double cut_weight = 0.0;
    double objective = 0.0;
    std::size_t restarts_used = 0;
    bool exact = false;
    std::vector<double> improvement;
};

// Minimum balanced bipartition of `vertices` (even size >= 2) by
// Kernighan-Lin pair-swapping from `restarts` seeded random splits.  With
// exact = true (allowed up to kExactCutLimit vertices) every balanced split
// is enumerated instead.  Signed weights are honored as-is.
CutSolution min_balanced_cut(const CorrelationGraph& graph,
                             std::vector<std::size_t> vertices, std::uint64_t seed,
                             std::size_t restarts = kDefaultRestarts, bool exact = false);

// Minimum balanced 2^P-way partition: recursive bisection followed by
// pairwise local refinement.  With exact = true (up to kExactPow2CutLimit
// vertices) every partition into equal parts is enumerated.  For P == 1 the
// result is identical to min_balanced_cut.
CutSolution min_balanced_pow2_cut(const CorrelationGraph& graph,
                                  std::vector<std::size_t> vertices,
                                  std::size_t spatial_dim, std::uint64_t seed,
                                  std::size_t restarts = kDefaultRestarts,
                                  bool exact = false);

// ---------------------------------------------------------------------------
// Feature rearrangement: recursive balanced splitting of the correlation
// graph.  The permutation sends source feature index (row-major grid
// coordinate when spatial_dim > 1) to target position, i.e. the features of
// the first level-1 part land in the first half of positions, and so on down
// to single positions at the deepest level.
// ---------------------------------------------------------------------------
struct LevelCut {
    std::size_t level = 0;       // split performed on a level-`level` block
    std::size_t block = 0;       // block index within its level (ordinal)
    double cut_weight = 0.0;
    std::vector<std::vector<std::size_t>> parts; // original feature indices
};

struct FeaturePermutation {
    std::size_t spatial_dim = 1;
    std::size_t n = 0;                 // feature count (P == 1) / grid side (P > 1)
    std::vector<std::size_t> map;      // source index -> target index
    std::vector<LevelCut> provenance;  // cuts that produced the permutation

    std::size_t size() const { return map.size(); }
    std::vector<std::size_t> inverse() const;
};

FeaturePermutation rearrange_1d(const Dataset& ds, std::uint64_t seed,
                                std::size_t restarts = kDefaultRestarts,
                                bool exact = false);
FeaturePermutation rearrange_pdim(const Dataset& ds, std::size_t spatial_dim,
                                  std::uint64_t seed,
                                  std::size_t restarts = kDefaultRestarts,
                                  bool exact = false);

// Returns a dataset whose feature at position perm.map[f] is ds's feature f.
Dataset apply_permutation(const Dataset& ds, const FeaturePermutation& perm);

// k uniformly random transpositions of feature positions.
Dataset random_swaps(const Dataset& ds, std::size_t k, std::uint64_t seed);

} // namespace entanglekit
