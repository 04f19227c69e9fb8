#pragma once

#include <cstddef>
#include <span>

#include "stftlab/signal.hpp"

// Thin FFTW wrapper. Plans are created once per (size, direction) and kept in
// a process-wide registry guarded by a mutex; execution is reentrant.
namespace stftlab::fft {

enum class Direction { forward, backward };

/// Unnormalized in-place DFT: forward uses exp(-2 pi i k m / N).
void dft_inplace(std::span<cplx> data, Direction dir);

/// Transform between a centered sample grid and its centered dual grid:
///   out[m] = weight * sum_k in[k] exp(-+2 pi i (k - N/2)(m - N/2) / N).
/// With weight = dx this is the Riemann sum of the continuum transform.
void centered_transform(std::span<cplx> data, double weight, Direction dir);

/// Same along every row (contiguous, length nw) of a row-major nx x nw array.
void centered_transform_rows(std::span<cplx> data, std::size_t nx, std::size_t nw,
                             double weight, Direction dir);

/// Same along both axes of a row-major nx x nw array.
void centered_transform_2d(std::span<cplx> data, std::size_t nx, std::size_t nw,
                           double weight, Direction dir);

/// Signed frequency of DFT bin k for an N-point grid of extent L, in cycles
/// per unit (uncentered FFT ordering).
inline double bin_frequency(std::size_t k, std::size_t n, double length) {
  const auto sk = static_cast<double>(k);
  const auto sn = static_cast<double>(n);
  return (k < n / 2 ? sk : sk - sn) / length;
}

}  // namespace stftlab::fft
