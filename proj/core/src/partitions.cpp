#include "entanglekit/partitions.hpp"

#include <numeric>

#include <json.hpp>

namespace entanglekit {

bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

std::size_t log2_exact(std::size_t n) {
    if (!is_power_of_two(n))
        throw argument_error("value is not a power of two");
    std::size_t l = 0;
    while ((std::size_t{1} << l) < n)
        ++l;
    return l;
}

std::size_t CompatibleMap::to_axis(std::span<const std::size_t> coords) const {
    if (coords.size() != dim)
        throw argument_error("coordinate tuple has wrong dimension");
    std::size_t flat = 0;
    for (std::size_t p = 0; p < dim; ++p) {
        if (coords[p] >= side)
            throw argument_error("coordinate out of range");
        flat = flat * side + coords[p];
    }
    return forward[flat];
}

std::vector<std::size_t> CompatibleMap::to_coords(std::size_t axis) const {
    if (axis >= inverse.size())
        throw argument_error("axis out of range");
    std::size_t flat = inverse[axis];
    std::vector<std::size_t> coords(dim);
    for (std::size_t p = dim; p-- > 0;) {
        coords[p] = flat % side;
        flat /= side;
    }
    return coords;
}

CompatibleMap build_compatible_map(std::size_t side, std::size_t dim) {
    if (dim < 1)
        throw argument_error("spatial dimension must be >= 1");
    if (!is_power_of_two(side) || side < 2)
        throw argument_error("grid side must be a power of two >= 2");
    const std::size_t levels = log2_exact(side);
    if (levels * dim > 60)
        throw capacity_error("grid too large for axis indexing");

    CompatibleMap map;
    map.side = side;
    map.dim = dim;
    std::size_t count = 1;
    for (std::size_t p = 0; p < dim; ++p)
        count *= side;
    map.forward.resize(count);
    map.inverse.resize(count);

    // Interleave coordinate bits, first coordinate most significant within
    // each bit group.  With this layout the axes descending from any dyadic
    // block form one contiguous range, which is exactly the compatibility
    // property the tree-shaped networks rely on.
    std::vector<std::size_t> coords(dim, 0);
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t axis = 0;
        for (std::size_t b = levels; b-- > 0;)
            for (std::size_t p = 0; p < dim; ++p)
                axis = (axis << 1) | ((coords[p] >> b) & 1u);
        map.forward[flat] = axis;
        map.inverse[axis] = flat;
        for (std::size_t p = dim; p-- > 0;) {
            if (++coords[p] < side)
                break;
            coords[p] = 0;
        }
    }
    return map;
}

std::vector<std::size_t> CanonicalPartition::features(const CompatibleMap& map) const {
    if (block.size() != map.dim)
        throw argument_error("partition/map dimension mismatch");
    const std::size_t span_len = map.side >> level; // block side length
    std::vector<std::size_t> out;

    // Enumerate the block's coordinate cube row-major.
    std::vector<std::size_t> offset(map.dim, 0);
    bool done = false;
    while (!done) {
        std::size_t flat = 0;
        for (std::size_t p = 0; p < map.dim; ++p)
            flat = flat * map.side + (block[p] * span_len + offset[p]);
        out.push_back(flat);
        done = true;
        for (std::size_t p = map.dim; p-- > 0;) {
            if (++offset[p] < span_len) {
                done = false;
                break;
            }
            offset[p] = 0;
        }
    }
    return out;
}

AxisPartition CanonicalPartition::axis_partition() const {
    if (degenerate)
        throw partition_error("level-0 canonical split is not a proper bipartition");
    // The grid holds 2^(l*P) blocks of axes.size() axes each.
    const std::size_t n_axes = axes.size() << (level * block.size());
    return AxisPartition(n_axes, axes);
}

std::vector<CanonicalPartition> canonical_partitions(std::size_t side, std::size_t dim) {
    return canonical_partitions(side, dim, 0, log2_exact(side));
}

std::vector<CanonicalPartition> canonical_partitions(std::size_t side, std::size_t dim,
                                                     std::size_t level_lo,
                                                     std::size_t level_hi) {
    if (dim < 1)
        throw argument_error("spatial dimension must be >= 1");
    if (!is_power_of_two(side) || side < 2)
        throw argument_error("grid side must be a power of two >= 2");
    const std::size_t levels = log2_exact(side);
    if (level_hi > levels || level_lo > level_hi)
        throw argument_error("bad canonical level range");
    const auto map = build_compatible_map(side, dim);

    std::vector<CanonicalPartition> out;
    for (std::size_t l = level_lo; l <= level_hi; ++l) {
        const std::size_t blocks_per_dim = std::size_t{1} << l;
        const std::size_t block_side = side >> l;
        std::size_t block_axes = 1;
        for (std::size_t p = 0; p < dim; ++p)
            block_axes *= block_side;

        std::vector<std::size_t> blk(dim, 0);
        for (;;) {
            CanonicalPartition cp;
            cp.level = l;
            cp.block = blk;
            cp.degenerate = (l == 0);
            // Morton layout: the block's axes are one contiguous range whose
            // start is the interleaved block coordinate scaled by the block
            // volume.
            std::size_t block_index = 0;
            for (std::size_t b = l; b-- > 0;)
                for (std::size_t p = 0; p < dim; ++p)
                    block_index = (block_index << 1) | ((blk[p] >> b) & 1u);
            const std::size_t start = block_index * block_axes;
            cp.axes.resize(block_axes);
            std::iota(cp.axes.begin(), cp.axes.end(), start);
            out.push_back(std::move(cp));

            std::size_t p = dim;
            bool done = true;
            while (p-- > 0) {
                if (++blk[p] < blocks_per_dim) {
                    done = false;
                    break;
                }
                blk[p] = 0;
            }
            if (done)
                break;
        }
    }
    return out;
}

std::string partition_to_json(const CanonicalPartition& cp) {
    nlohmann::ordered_json j;
    j["level"] = cp.level;
    j["block"] = cp.block;
    j["axes"] = cp.axes;
    return j.dump();
}

} // namespace entanglekit
