#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "entanglekit/dataset.hpp"

namespace entanglekit {

// On-disk dataset: a CSV body (one row per instance, optional leading label
// column, then N*D feature scalars grouped feature-major) plus a JSON sidecar
// at <path>.json holding {M, N, D, P, labeled, embedding, theta}.
struct DatasetFile {
    Dataset dataset;
    std::string embedding = "raw"; // "raw" | "sincos"
    double theta = kDefaultTheta;
};

// Writes the CSV body and its sidecar.  Values use shortest round-trip
// formatting, so load(save(ds)) reproduces every scalar bit-exactly.
void save_dataset(const std::filesystem::path& path, const Dataset& ds,
                  const std::string& embedding = "raw", double theta = kDefaultTheta);

// Loads CSV + sidecar.  Labels, when present, must be +/-1; malformed input
// raises parse_error carrying the offending line and column.
DatasetFile load_dataset(const std::filesystem::path& path);

// Loads a multi-class file and reduces it to binary one-vs-all: rows whose
// label equals target_class become +1, the rest -1, and the majority side is
// subsampled (seeded) so both sides have equal count.  Surviving rows keep
// their original order.
DatasetFile load_dataset_one_vs_all(const std::filesystem::path& path, double target_class,
                                    std::uint64_t seed);

} // namespace entanglekit
