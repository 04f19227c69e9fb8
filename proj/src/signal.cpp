#include "stftlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stftlab/fft.hpp"

namespace stftlab {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_same_grid(const Grid1D& a, const Grid1D& b) {
  if (!(a == b)) throw Error("signals live on different grids");
}

void require_same_grid(const TFGrid& a, const TFGrid& b) {
  if (!(a == b)) throw Error("fields live on different TF grids");
}

}  // namespace

Grid1D Grid1D::make(double length, std::size_t count) {
  if (!(length > 0.0) || !std::isfinite(length)) throw Error("grid length must be positive");
  if (count < 8) throw Error("grid needs at least 8 samples");
  if (!is_power_of_two(count)) throw Error("grid sample count must be a power of two");
  return Grid1D(length, count);
}

std::vector<double> Grid1D::points() const {
  std::vector<double> xs(count_);
  for (std::size_t k = 0; k < count_; ++k) xs[k] = point(k);
  return xs;
}

std::optional<std::size_t> Grid1D::index_of(double x) const {
  const double t = (x + 0.5 * length_) / spacing();
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(count_)) return std::nullopt;
  return static_cast<std::size_t>(r);
}

std::optional<std::int64_t> Grid1D::steps_of(double u) const {
  const double t = u / spacing();
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9) return std::nullopt;
  return static_cast<std::int64_t>(r);
}

Signal::Signal(Grid1D g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.count()) throw Error("signal length does not match its grid");
  require_finite(values, "signal");
}

Signal& Signal::operator+=(const Signal& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += other.values[k];
  return *this;
}

Signal& Signal::operator-=(const Signal& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] -= other.values[k];
  return *this;
}

Signal& Signal::operator*=(cplx s) {
  for (auto& v : values) v *= s;
  return *this;
}

Signal operator+(Signal a, const Signal& b) { return a += b; }
Signal operator-(Signal a, const Signal& b) { return a -= b; }
Signal operator*(cplx s, Signal a) { return a *= s; }

TFField::TFField(TFGrid g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw Error("field size does not match its TF grid");
  require_finite(values, "field");
}

TFField& TFField::operator+=(const TFField& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += other.values[k];
  return *this;
}

TFField& TFField::operator-=(const TFField& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] -= other.values[k];
  return *this;
}

TFField& TFField::operator*=(cplx s) {
  for (auto& v : values) v *= s;
  return *this;
}

TFField operator+(TFField a, const TFField& b) { return a += b; }
TFField operator-(TFField a, const TFField& b) { return a -= b; }
TFField operator*(cplx s, TFField a) { return a *= s; }

TFField modulus(const TFField& f) {
  TFField out(f.grid);
  for (std::size_t k = 0; k < f.values.size(); ++k) out.values[k] = std::abs(f.values[k]);
  return out;
}

Signal modulus(const Signal& f) {
  Signal out(f.grid);
  for (std::size_t k = 0; k < f.values.size(); ++k) out.values[k] = std::abs(f.values[k]);
  return out;
}

void require_finite(std::span<const cplx> values, const char* what) {
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(std::string(what) + ": non-finite sample");
    }
  }
}

double l2_norm(const Signal& f) {
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::norm(v);
  return std::sqrt(acc * f.grid.spacing());
}

double l2_norm(const TFField& f) {
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::norm(v);
  return std::sqrt(acc * f.grid.cell_area());
}

cplx inner(const Signal& f, const Signal& g) {
  require_same_grid(f.grid, g.grid);
  cplx acc{};
  for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * std::conj(g[k]);
  return acc * f.grid.spacing();
}

double sup_norm(std::span<const cplx> values) {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

double boundary_mass_fraction(const Signal& f, std::size_t frame) {
  const std::size_t n = f.size();
  frame = std::min(frame, n / 2);
  double edge = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double m = std::norm(f[k]);
    total += m;
    if (k < frame || k + frame >= n) edge += m;
  }
  return total > 0.0 ? edge / total : 0.0;
}

Signal gaussian(const Grid1D& grid, double center, double modulation) {
  if (std::abs(center) > 0.5 * grid.length() - 4.0) {
    throw Error("gaussian center too close to the window boundary");
  }
  const double amp = std::pow(2.0, 0.25);
  Signal out(grid);
  for (std::size_t k = 0; k < grid.count(); ++k) {
    const double x = grid.point(k);
    const double d = x - center;
    out[k] = amp * std::exp(-std::numbers::pi * d * d) *
             std::polar(1.0, 2.0 * std::numbers::pi * modulation * x);
  }
  return out;
}

// psi_n are the orthonormal Hermite functions for exp(-y^2/2); the
// substitution y = sqrt(2 pi) x moves them to the exp(-pi x^2) convention.
Signal hermite(const Grid1D& grid, int n) {
  if (n < 0) throw Error("hermite index must be nonnegative");
  const double scale = std::sqrt(2.0 * std::numbers::pi);
  const double norm = std::pow(2.0 * std::numbers::pi, 0.25);
  Signal out(grid);
  for (std::size_t k = 0; k < grid.count(); ++k) {
    const double y = scale * grid.point(k);
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
    for (int m = 0; m < n; ++m) {
      const double next = std::sqrt(2.0 / (m + 1.0)) * y * cur - std::sqrt(m / (m + 1.0)) * prev;
      prev = cur;
      cur = next;
    }
    out[k] = norm * cur;
  }
  const double edge = std::max(std::abs(out[0]), std::abs(out[1]));
  if (edge > 1e-10) throw Error("hermite function does not decay inside the window; enlarge L");
  return out;
}

Signal translate(const Signal& f, double u) {
  const auto steps = f.grid.steps_of(u);
  if (!steps) throw Error("translation is not a multiple of the grid spacing");
  const auto n = static_cast<std::int64_t>(f.size());
  const std::int64_t s = ((*steps % n) + n) % n;
  Signal out(f.grid);
  for (std::int64_t k = 0; k < n; ++k) out[static_cast<std::size_t>((k + s) % n)] = f[k];
  return out;
}

Signal modulate(const Signal& f, double eta) {
  const auto steps = f.grid.dual().steps_of(eta);
  if (!steps) throw Error("modulation is not a multiple of the dual grid spacing");
  const double freq = static_cast<double>(*steps) * f.grid.dual_spacing();
  Signal out(f.grid);
  for (std::size_t k = 0; k < f.size(); ++k) {
    out[k] = f[k] * std::polar(1.0, 2.0 * std::numbers::pi * freq * f.grid.point(k));
  }
  return out;
}

Signal fourier(const Signal& f) {
  Signal out(f.grid.dual(), f.values);
  fft::centered_transform(out.values, f.grid.spacing(), fft::Direction::forward);
  return out;
}

Signal inverse_fourier(const Signal& spectrum) {
  Signal out(spectrum.grid.dual(), spectrum.values);
  fft::centered_transform(out.values, spectrum.grid.spacing(), fft::Direction::backward);
  return out;
}

}  // namespace stftlab
