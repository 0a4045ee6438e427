#pragma once

#include <iosfwd>

namespace entanglekit::cli {

// Parses argv and runs one subcommand.  Reports go to `out`, diagnostics to
// `err`.  Exit codes: 0 success, 2 parse error (CLI or file), 3 precondition
// violation, 4 capacity exceeded, 1 internal numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace entanglekit::cli
