#pragma once

#include <cstddef>
#include <functional>

namespace pnml {

// Worker count: hardware concurrency, capped by the PNML_THREADS environment
// variable when it is set to a positive integer.
unsigned worker_count();

// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
// write results by index so output order never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pnml
