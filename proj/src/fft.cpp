#include "stftlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace stftlab::fft {
namespace {

class PlanRegistry {
 public:
  ~PlanRegistry() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, Direction dir) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, dir == Direction::forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf,
                                      dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw Error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

PlanRegistry& registry() {
  static PlanRegistry r;
  return r;
}

inline double alternating(std::size_t k) { return (k & 1U) ? -1.0 : 1.0; }

}  // namespace

void dft_inplace(std::span<cplx> data, Direction dir) {
  if (data.empty()) return;
  fftw_plan plan = registry().get(data.size(), dir);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

// (k - N/2)(m - N/2) = km - N(k+m)/2 + N^2/4, so the phase splits into
// (-1)^k (-1)^m (-1)^{N/2} around a plain DFT (N even).
void centered_transform(std::span<cplx> data, double weight, Direction dir) {
  const std::size_t n = data.size();
  for (std::size_t k = 0; k < n; ++k) data[k] *= alternating(k);
  dft_inplace(data, dir);
  const double global = alternating(n / 2) * weight;
  for (std::size_t m = 0; m < n; ++m) data[m] *= alternating(m) * global;
}

void centered_transform_rows(std::span<cplx> data, std::size_t nx, std::size_t nw,
                             double weight, Direction dir) {
  for (std::size_t ix = 0; ix < nx; ++ix) {
    centered_transform(data.subspan(ix * nw, nw), weight, dir);
  }
}

void centered_transform_2d(std::span<cplx> data, std::size_t nx, std::size_t nw,
                           double weight, Direction dir) {
  centered_transform_rows(data, nx, nw, 1.0, dir);
  std::vector<cplx> column(nx);
  for (std::size_t iw = 0; iw < nw; ++iw) {
    for (std::size_t ix = 0; ix < nx; ++ix) column[ix] = data[ix * nw + iw];
    centered_transform(column, weight, dir);
    for (std::size_t ix = 0; ix < nx; ++ix) data[ix * nw + iw] = column[ix];
  }
}

}  // namespace stftlab::fft
