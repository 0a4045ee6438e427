#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "entanglekit/errors.hpp"
#include "entanglekit/tensor.hpp"

namespace entanglekit {

bool is_power_of_two(std::size_t n);

// Integer log2 for exact powers of two.
std::size_t log2_exact(std::size_t n);

// ---------------------------------------------------------------------------
// CompatibleMap: bijection between P-dimensional grid coordinates and tensor
// axis positions, chosen so that every dyadic coordinate block maps onto a
// contiguous axis range (bit interleaving, a.k.a. Morton / Z-order).
//
// Grid coordinates are 0-based tuples (c_1, ..., c_P) with each c_p < side,
// flattened row-major (c_1 slowest) where a single index is convenient.
// For P == 1 the map is the identity.
// ---------------------------------------------------------------------------
struct CompatibleMap {
    std::size_t side = 0;              // grid side length, a power of two
    std::size_t dim = 1;               // P
    std::vector<std::size_t> forward;  // row-major coordinate -> axis
    std::vector<std::size_t> inverse;  // axis -> row-major coordinate

    std::size_t levels() const { return log2_exact(side); }     // L
    std::size_t axis_count() const { return forward.size(); }   // side^P

    std::size_t to_axis(std::span<const std::size_t> coords) const;
    std::vector<std::size_t> to_coords(std::size_t axis) const;
};

CompatibleMap build_compatible_map(std::size_t side, std::size_t dim);

// ---------------------------------------------------------------------------
// CanonicalPartition: one member of the canonical partition family.  At level
// l the grid splits into 2^(l*P) aligned cubic blocks of side 2^(L-l); the
// partition keeps the axes of one block on one side of the bipartition.
//
// Level 0 (the whole grid vs nothing) is enumerated for completeness but
// flagged degenerate: it does not define a proper bipartition.  Level L
// blocks are singletons and are valid.
// ---------------------------------------------------------------------------
struct CanonicalPartition {
    std::size_t level = 0;            // l in {0, ..., L}
    std::vector<std::size_t> block;   // P block coordinates, each < 2^l
    std::vector<std::size_t> axes;    // sorted axis subset (contiguous range)
    bool degenerate = false;          // true exactly when level == 0

    // Feature/grid positions covered by the block, as row-major coordinate
    // indices.  For P == 1 this equals `axes`.
    std::vector<std::size_t> features(const CompatibleMap& map) const;

    // View as a plain axis bipartition (throws partition_error if degenerate).
    AxisPartition axis_partition() const;
};

// All canonical partitions for a grid of the given side length (a power of
// two >= 2) and spatial dimension P >= 1, ordered by level ascending, then by
// block coordinate (row-major).
std::vector<CanonicalPartition> canonical_partitions(std::size_t side, std::size_t dim);

// Subrange restricted to levels in [level_lo, level_hi].
std::vector<CanonicalPartition> canonical_partitions(std::size_t side, std::size_t dim,
                                                     std::size_t level_lo,
                                                     std::size_t level_hi);

// Compact JSON form {"level": l, "block": [n_1..n_P], "axes": [...]}.
std::string partition_to_json(const CanonicalPartition& cp);

} // namespace entanglekit
