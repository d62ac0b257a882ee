#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace bcp {

/// Worker count: BCP_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Calls body(i) for i in [0, n) on up to thread_count() threads. Each index
/// is processed exactly once; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace bcp
