#include "stftlab/parallel.hpp"

#include <atomic>

namespace stftlab {
namespace {

std::atomic<std::size_t>& thread_cap() {
  static std::atomic<std::size_t> cap{std::max<std::size_t>(1, std::thread::hardware_concurrency())};
  return cap;
}

}  // namespace

std::size_t max_threads() { return thread_cap().load(); }

void set_max_threads(std::size_t n) { thread_cap().store(std::max<std::size_t>(1, n)); }

}  // namespace stftlab
