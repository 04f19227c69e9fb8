#include <algorithm>
#include <cmath>
#include <numbers>

#include "stftlab/fft.hpp"
#include "stftlab/transforms.hpp"

namespace stftlab {

RecoveryResult recover(const TFField& measurement, const Grid1D& signal_grid, const WindowSpec& window,
                       double tau) {
  const TFGrid tf = self_dual_grid(signal_grid);
  if (!(measurement.grid == tf)) throw Error("measurement must live on the self-dual grid of the signal");
  require_finite(measurement.values, "recover");
  if (sup_norm(measurement.values) == 0.0) throw Error("zero measurement");

  const std::size_t n = signal_grid.count();
  const std::size_t origin = n / 2;
  const TFField aphi = ambiguity(window.on(signal_grid), tf);
  if (tau <= 0.0) tau = 1e-6 * std::abs(aphi.at(origin, origin));
  if (std::abs(aphi.at(origin, origin)) <= tau) throw Error("threshold exceeds |A phi(0, 0)|");

  TFField af = measurement_spectrum(measurement);
  std::size_t masked = 0;
  for (std::size_t k = 0; k < af.values.size(); ++k) {
    const cplx d = aphi.values[k];
    if (std::abs(d) >= tau) {
      af.values[k] /= std::conj(d);
    } else {
      af.values[k] = 0.0;
      ++masked;
    }
  }
  bool row_alive = false;
  for (std::size_t b = 0; b < n; ++b) row_alive = row_alive || std::abs(aphi.at(origin, b)) >= tau;
  if (!row_alive) throw Error("threshold masks the whole x = 0 row");

  // A f -> V_f f -> f(t) conj(f(t - x)) by an inverse transform in omega.
  for (std::size_t a = 0; a < n; ++a) {
    const double x = tf.x.point(a);
    for (std::size_t b = 0; b < n; ++b) {
      af.at(a, b) *= std::polar(1.0, -std::numbers::pi * x * tf.omega.point(b));
    }
  }
  fft::centered_transform_rows(af.values, n, n, tf.omega.spacing(), fft::Direction::backward);

  std::size_t k0 = 0;
  double peak = -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = af.at(origin, k).real();
    if (v > peak) {
      peak = v;
      k0 = k;
    }
  }
  if (peak <= 0.0) throw Error("zero measurement");
  const double anchor = std::sqrt(peak);
  Signal out(signal_grid);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = af.at((k + n + origin - k0) % n, k) / anchor;
  }
  return {std::move(out), static_cast<double>(masked) / static_cast<double>(tf.size()), tau, k0};
}

}  // namespace stftlab
