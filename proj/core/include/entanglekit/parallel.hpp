#pragma once

#include <cstddef>
#include <functional>

namespace entanglekit {

// Number of worker threads heavy loops may use.  Defaults to the hardware
// concurrency; the ENTANGLEKIT_THREADS environment variable (>= 1) caps it.
std::size_t thread_budget();

// Runs fn(i) for i in [0, n), statically chunked over the thread budget.
// Each index is touched exactly once, so results are deterministic as long as
// fn(i) writes only to slot i of some preallocated output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace entanglekit
