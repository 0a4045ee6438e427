#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace entanglekit {

// Error taxonomy shared across the library.  The command-line tool maps these
// onto process exit codes (see tools/), everything else just propagates them.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A parameter value is outside its documented range (negative width, bad level
// range, restarts == 0, ...).
struct argument_error : error {
    using error::error;
};

// Tensor/dataset dimensions do not line up.
struct shape_error : error {
    using error::error;
};

// An axis subset is empty, improper, or out of range for the tensor at hand.
struct partition_error : error {
    using error::error;
};

// A dense intermediate would exceed the configured element budget.
struct capacity_error : error {
    using error::error;
};

// An operation was called on inputs that violate its stated preconditions
// (unlabeled data where labels are required, non-power-of-two feature counts, ...).
struct precondition_error : error {
    using error::error;
};

// Degenerate input: zero tensor where a direction is needed, constant feature
// where a variance is needed.
struct degenerate_error : error {
    using error::error;
};

// Non-finite input, or an internal numerical invariant failed badly enough
// that the result would be meaningless.
struct numeric_error : error {
    using error::error;
};

// Malformed file content.  Carries a 1-based line/column when known (0 = n/a).
struct parse_error : error {
    std::size_t line = 0;
    std::size_t column = 0;

    explicit parse_error(const std::string& msg, std::size_t line_ = 0, std::size_t column_ = 0)
        : error(line_ ? msg + " (line " + std::to_string(line_) +
                            (column_ ? ", column " + std::to_string(column_) : std::string{}) + ")"
                      : msg),
          line(line_),
          column(column_) {}
};

} // namespace entanglekit
