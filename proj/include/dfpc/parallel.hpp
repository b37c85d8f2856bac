#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dfpc {

namespace detail {
inline std::atomic<unsigned>& worker_slot() {
  static std::atomic<unsigned> n{1};
  return n;
}
}  // namespace detail

inline unsigned worker_count() { return detail::worker_slot().load(); }
inline void set_worker_count(unsigned n) { detail::worker_slot().store(std::max(1u, n)); }

// Runs fn(i) for i in [0, count) over contiguous chunks, one per worker.
// Callers write results into index-addressed slots, so the output never
// depends on the worker count. The exception from the lowest chunk wins.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace dfpc
