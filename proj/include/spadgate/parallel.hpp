#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spadgate {

/// Worker count: SPAD_GATE_THREADS if set to a positive integer, else the
/// hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPAD_GATE_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap > 0) return static_cast<unsigned>(cap);
    } catch (const std::exception&) {
      // malformed value: fall through to the hardware default
    }
  }
  return hw;
}

/// Calls body(begin, end) on disjoint contiguous slices covering [0, n).
/// The first exception thrown by any slice is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, const Body& body, unsigned workers = worker_count()) {
  if (n == 0) return;
  const std::size_t slices = std::min<std::size_t>(std::max(1u, workers), n);
  if (slices == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  threads.reserve(slices);
  for (std::size_t k = 0; k < slices; ++k) {
    const std::size_t begin = n * k / slices;
    const std::size_t end = n * (k + 1) / slices;
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace spadgate
