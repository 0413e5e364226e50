#pragma once

#include <cstddef>
#include <functional>

namespace instab {

/// Worker count: hardware concurrency, capped by INSTAB_THREADS when set.
std::size_t worker_count();

/// Runs body(i) for every i in [0, count) on up to worker_count() threads.
/// Indices are claimed dynamically; callers must write results by index.
/// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace instab
