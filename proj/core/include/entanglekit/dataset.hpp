#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "entanglekit/errors.hpp"

namespace entanglekit {

// Default angular frequency of the sine/cosine feature embedding.
inline constexpr double kDefaultTheta = 0.085;

// ---------------------------------------------------------------------------
// Dataset: M instances of N feature vectors of length D, plus optional +/-1
// labels.  Values are stored instance-major, then feature, then component.
//
// For spatial_dim == P > 1 the N features live on a P-dimensional grid with
// side length N^(1/P); feature index = row-major grid coordinate.
// ---------------------------------------------------------------------------
struct Dataset {
    std::size_t n_features = 0;     // N
    std::size_t feature_dim = 1;    // D
    std::size_t spatial_dim = 1;    // P
    std::vector<double> values;     // M * N * D
    std::vector<int> labels;        // empty when unlabeled, else one of {-1, +1} per instance
    bool normalized = false;        // every feature vector has unit Euclidean norm
    std::size_t original_features = 0; // pre-padding feature count; 0 = never padded

    std::size_t instance_count() const {
        const std::size_t stride = n_features * feature_dim;
        return stride ? values.size() / stride : 0;
    }

    bool labeled() const { return !labels.empty(); }

    // Grid side length for spatial_dim > 1 (n_features must be side^P).
    std::size_t side() const;

    double value(std::size_t m, std::size_t n, std::size_t d) const {
        return values[(m * n_features + n) * feature_dim + d];
    }
    double& value(std::size_t m, std::size_t n, std::size_t d) {
        return values[(m * n_features + n) * feature_dim + d];
    }

    Eigen::Map<const Eigen::VectorXd> feature(std::size_t m, std::size_t n) const {
        return {values.data() + (m * n_features + n) * feature_dim,
                static_cast<Eigen::Index>(feature_dim)};
    }

    // Throws shape_error / precondition_error when sizes or labels are off.
    void validate() const;
};

// phi(x) = (sin(pi * theta * x), cos(pi * theta * x)); unit norm for every x.
Eigen::Vector2d embed_sincos(double x, double theta = kDefaultTheta);

// Applies embed_sincos to every scalar feature of a D == 1 dataset, yielding
// a normalized D == 2 dataset.  Throws precondition_error when D != 1.
Dataset embed_dataset_sincos(const Dataset& ds, double theta = kDefaultTheta);

// Pads a P == 1 dataset with constant features (value 0, which embeds to the
// unit vector (0, 1)) up to the next power of two.  Records the original
// feature count; a dataset already at a power of two is returned unchanged.
Dataset pad_to_pow2(const Dataset& ds);

} // namespace entanglekit
