#pragma once

#include <cstddef>
#include <span>

#include "entanglekit/dataset.hpp"
#include "entanglekit/tensor.hpp"

namespace entanglekit {

// ---------------------------------------------------------------------------
// Multivariate Pearson correlation between two vector-valued features:
//
//     p(a, b) = tr(C_ab) / tr((C_a C_b)^(1/2))
//
// with C_a, C_b, C_ab the empirical (cross-)covariance matrices (mean
// subtracted, 1/M normalization) and the principal PSD square root of the
// product.  Reduces to the classical Pearson coefficient for D == 1.
// Throws degenerate_error when either feature has zero covariance trace.
// ---------------------------------------------------------------------------
double multivariate_pearson(const Dataset& ds, std::size_t a, std::size_t b);

// ---------------------------------------------------------------------------
// Correlation graph: complete graph over the features with edge weights
// p(a, b).  Features with zero covariance trace are masked: every edge they
// touch gets weight 0 (recorded in `masked`).  With `embedded` the weights
// are computed on the sine/cosine embedding of scalar features instead of
// the raw values.
// ---------------------------------------------------------------------------
struct CorrelationGraph {
    Matrix weights;              // symmetric, zero diagonal
    std::vector<bool> masked;    // per feature

    std::size_t size() const { return static_cast<std::size_t>(weights.rows()); }
};

CorrelationGraph build_correlation_graph(const Dataset& ds, bool embedded = false,
                                         double theta = kDefaultTheta);

// Surrogate entanglement of a feature subset: sum of |K| x |K^c| edge
// weights across the bipartition (complement taken in the full feature set).
double surrogate_entanglement(const CorrelationGraph& graph,
                              std::span<const std::size_t> subset);
double surrogate_entanglement(const Dataset& ds, std::span<const std::size_t> subset);

// Total weight of edges crossing between `subset` and the rest of `working`
// (both given as vertex indices of the graph; subset must lie inside working).
double cut_weight(const CorrelationGraph& graph, std::span<const std::size_t> subset,
                  std::span<const std::size_t> working);

// Mean surrogate entanglement over canonical partitions with levels in
// [level_lo, level_hi], for a spatial_dim-dimensional grid of side `side`.
double average_canonical_surrogate(const CorrelationGraph& graph, std::size_t side,
                                   std::size_t spatial_dim, std::size_t level_lo,
                                   std::size_t level_hi);

// The correlation graph as a 2-axis tensor (for export through the binary
// tensor container).
DenseTensor graph_to_tensor(const CorrelationGraph& graph);

} // namespace entanglekit
