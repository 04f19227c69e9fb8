#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace stftlab {

/// Upper bound on worker threads (default: hardware concurrency).
std::size_t max_threads();
void set_max_threads(std::size_t n);

/// Runs body(i) for i in [0, n). Each index is handled by exactly one
/// thread, so results written per index do not depend on the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min(max_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace stftlab
