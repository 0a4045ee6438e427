#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "entanglekit/partitions.hpp"
#include "entanglekit/tensor.hpp"

namespace entanglekit {

// ---------------------------------------------------------------------------
// TreeTensorNetwork: a perfect 2^P-ary tree of tensors over F = (2^L)^P open
// axes, uniform inner width R.
//
// Level 0 holds one matrix per open axis (leaf n: D_n x R).  Level h in
// [1, L) holds F / arity^h transfer matrices of shape (R^arity x R), rows
// indexed lexicographically over the children (first child slowest).  Level L
// is the root transfer, (R^arity x 1): the network's output is a scalar per
// joint leaf assignment, i.e. a dense tensor over the open axes.
//
// Axes descendant to any node are contiguous, so node (h, j) covers the axis
// range [j * arity^h, (j+1) * arity^h).
// ---------------------------------------------------------------------------
class TreeTensorNetwork {
public:
    TreeTensorNetwork(std::vector<std::size_t> leaf_dims, std::size_t width,
                      std::size_t spatial_dim);

    // All node entries independent standard normal draws from `seed`.
    static TreeTensorNetwork random(std::vector<std::size_t> leaf_dims, std::size_t width,
                                    std::size_t spatial_dim, std::uint64_t seed);

    std::size_t leaf_count() const { return leaf_dims_.size(); }
    std::size_t arity() const { return arity_; }
    std::size_t width() const { return width_; }
    std::size_t spatial_dim() const { return spatial_dim_; }
    std::size_t height() const { return levels_.size() - 1; } // L
    const std::vector<std::size_t>& leaf_dims() const { return leaf_dims_; }

    std::size_t nodes_at(std::size_t level) const { return levels_[level].size(); }
    const Matrix& node(std::size_t level, std::size_t index) const {
        return levels_[level][index];
    }
    Matrix& node(std::size_t level, std::size_t index) { return levels_[level][index]; }

    // The dense tensor the network generates, axes in leaf order.  Throws
    // capacity_error when the result or an intermediate would exceed the
    // element budget.
    DenseTensor contract_full(std::size_t budget = kDefaultElementBudget) const;

    // <o_n x_n, W>: contracts one vector per leaf through the tree without
    // materializing W.
    double forward(const std::vector<Vector>& instance) const;

    // Multiplies the generated tensor by c (applied to the root transfer).
    void scale(double c);

    // Shape consistency check; throws shape_error on violation.
    void validate() const;

private:
    std::size_t arity_ = 2;
    std::size_t width_ = 1;
    std::size_t spatial_dim_ = 1;
    std::vector<std::size_t> leaf_dims_;
    std::vector<std::vector<Matrix>> levels_; // [0] leaves ... [L] root
};

// ---------------------------------------------------------------------------
// Hierarchical fit: builds a width-R tree network from truncated SVDs of the
// target's canonical matricizations (root-to-leaves projection cascade).
//
// With tail_R(K) = sqrt(sum of squared singular values beyond the R-th) of
// matricize(A, K), the achieved error obeys
//
//     ||W - A||  <=  sqrt(2 F - 3) * max over canonical K of tail_R(K),
//
// F the axis count; in particular the fit is exact (up to round-off) whenever
// every canonical matricization has rank <= R.
// ---------------------------------------------------------------------------
struct FitResult {
    TreeTensorNetwork network;
    double achieved_error = 0.0;
};

FitResult fit_hierarchical(const DenseTensor& target, std::size_t width,
                           const CompatibleMap& map,
                           std::size_t budget = kDefaultElementBudget);
// Convenience overload: arity = 2^P given directly.
FitResult fit_hierarchical(const DenseTensor& target, std::size_t width, std::size_t arity,
                           std::size_t budget = kDefaultElementBudget);

// sqrt(sum_{d > width} sigma_d^2) for matricize(a, part).
double truncation_tail(const DenseTensor& a, const AxisPartition& part, std::size_t width);

// ---------------------------------------------------------------------------
// Bound checks.
// ---------------------------------------------------------------------------

// One partition's instance of the necessary entanglement bound: any width-R
// network within eps of A (eps <= ||A||/4) forces
//     QE(A; K)  <=  ln R + (2 eps / ||A||) ln D_K + 2 sqrt(2 eps / ||A||),
// D_K the smaller matricization side.  For the zero tensor eps must be 0 and
// the ratio eps/||A|| is taken as 0.
struct BoundReport {
    double lhs = 0.0;    // QE(A; K)
    double rhs = 0.0;
    bool holds = false;  // lhs <= rhs
    double d_k = 0.0;
};

BoundReport check_necessary_bound(const DenseTensor& a, std::size_t width, double eps,
                                  const AxisPartition& part);

// Sufficient-condition check: when every proper canonical partition satisfies
//     QE(A; K)  <=  eps^2 / ((2 F - 3) ||A||^2) * ln R,
// a width-R network within eps exists; the checker then runs the fit and
// reports the error it achieved.
struct SufficiencyReport {
    struct Entry {
        CanonicalPartition partition;
        double qe = 0.0;
        double margin = 0.0; // threshold - qe
    };
    double threshold = 0.0;
    bool condition_holds = false;
    std::vector<Entry> entries;
    bool fit_ran = false;
    double achieved_error = 0.0;
    bool fit_within_eps = false;
};

SufficiencyReport check_sufficient_condition(const DenseTensor& a, std::size_t width,
                                             double eps, std::size_t spatial_dim = 1,
                                             std::size_t budget = kDefaultElementBudget);

// ---------------------------------------------------------------------------
// Serialization: one JSON header line {"N", "P", "R", "dims"} followed by the
// node tensors in breadth-first order (root first, leaves last), each in the
// binary tensor container format.
// ---------------------------------------------------------------------------
void save_network(const std::string& path, const TreeTensorNetwork& tn);
TreeTensorNetwork load_network(const std::string& path,
                               std::size_t budget = kDefaultElementBudget);

} // namespace entanglekit
