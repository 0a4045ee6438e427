#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "entanglekit/dataset.hpp"
#include "entanglekit/partitions.hpp"
#include "entanglekit/tensor.hpp"

namespace entanglekit {

// ---------------------------------------------------------------------------
// The empirical data tensor of a labeled dataset:
//
//     D = (1/M) sum_m  y_m * x^(1,m) o x^(2,m) o ... o x^(N,m)
//
// one axis per feature, axis n of extent D.  For spatial_dim > 1 the axes are
// ordered through the compatible map, so axis a holds the feature whose grid
// coordinate maps to a.  Requires labels; throws capacity_error past budget.
// ---------------------------------------------------------------------------
DenseTensor empirical_data_tensor_dense(const Dataset& ds,
                                        std::size_t budget = kDefaultElementBudget);

// ---------------------------------------------------------------------------
// Entanglement of the empirical data tensor under a feature bipartition,
// computed in Gram space without materializing the tensor:
//
//     G[i,j]  = y_i y_j prod_{n in K} <x^(n,i), x^(n,j)>
//     G'[i,j] =         prod_{n not in K} <x^(n,i), x^(n,j)>
//     Q       = S^(1/2) U^T U' S'^(1/2)   from G = U S U^T, G' = U' S' U'^T
//
// The entropy of Q's normalized squared singular values equals the dense
// route's value.  Eigenvalues below 1e-12 * trace are clamped to zero; a
// clamp larger than 1e-8 * trace aborts with numeric_error.  Cost is
// O(D N M^2 + M^3) per partition with O(M^2) extra memory.
// ---------------------------------------------------------------------------
double entanglement_gram(const Dataset& ds, std::span<const std::size_t> feature_subset);
double entanglement_gram(const Dataset& ds, const AxisPartition& part,
                         const CompatibleMap& map);
double entanglement_gram(const Dataset& ds, const CanonicalPartition& part,
                         const CompatibleMap& map);

// Mean Gram-route entanglement over the canonical partitions with levels in
// [level_lo, level_hi] (1 <= level_lo <= level_hi <= L).  Partitions are
// evaluated independently and may run on multiple threads.
double average_canonical_entanglement(const Dataset& ds, std::size_t level_lo,
                                      std::size_t level_hi);

// Sample-size bound: the number of instances that guarantees, with
// probability >= 1 - delta, that every subset's empirical entanglement lands
// within gamma of the population value:
//
//     M  >=  128 * ln(2/delta) * max_logD^4 / (pop_norm_lower^2 * gamma^4)
//
// rounded up.  max_logD is the largest log matricization side over subsets,
// pop_norm_lower a lower bound on the population tensor norm.
std::uint64_t sample_size_bound(double delta, double gamma, double pop_norm_lower,
                                double max_logD);

// Distance between the direction of the width-R fit and the direction of the
// empirical data tensor: || W/||W|| - D/||D|| ||, a value in [0, 2] that
// upper-bounds how suboptimal the data direction is for width-R networks.
double suboptimality_upper_bound(const Dataset& ds, std::size_t width,
                                 std::size_t budget = kDefaultElementBudget);

} // namespace entanglekit
