#pragma once

#include <cstddef>
#include <functional>

namespace siren {

// Worker cap shared by all parallel loops; 0 means hardware concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(begin, end) over a static partition of [0, n). Every index is
// visited exactly once and callers write only to slots they own, so results
// do not depend on the thread count. Nested calls run inline on the caller's
// thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace siren
