#pragma once

#include <cstddef>
#include <functional>

namespace shiftscope {

/// Worker threads to use: SHIFTSCOPE_THREADS when set (>= 1), otherwise the
/// hardware concurrency.
std::size_t thread_budget();

/// Runs fn(0..n-1), spread over up to thread_budget() threads when `enabled`.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, bool enabled = true);

}  // namespace shiftscope
