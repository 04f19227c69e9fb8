#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stftlab {

using cplx = std::complex<double>;

/// Raised for every violated precondition in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform periodic sampling of [-L/2, L/2).
///
/// Sample points are x_k = -L/2 + k*dx with dx = L/N. The dual (frequency)
/// grid has spacing 1/L and points (m - N/2)/L, so it is itself a Grid1D of
/// extent N/L.
class Grid1D {
 public:
  Grid1D() = default;

  /// Validates L > 0 and N a power of two, N >= 8.
  static Grid1D make(double length, std::size_t count);

  double length() const { return length_; }
  std::size_t count() const { return count_; }
  double spacing() const { return length_ / static_cast<double>(count_); }
  double dual_spacing() const { return 1.0 / length_; }
  double point(std::size_t k) const {
    return -0.5 * length_ + static_cast<double>(k) * spacing();
  }
  std::vector<double> points() const;

  /// Frequency grid of the centered DFT.
  Grid1D dual() const { return Grid1D(static_cast<double>(count_) / length_, count_); }

  /// Index of the sample at x, if x lies on the grid within 1e-9 spacings.
  std::optional<std::size_t> index_of(double x) const;

  /// Number of whole spacings in u, if u is an on-grid shift.
  std::optional<std::int64_t> steps_of(double u) const;

  bool operator==(const Grid1D& other) const = default;

 private:
  Grid1D(double length, std::size_t count) : length_(length), count_(count) {}

  double length_ = 0.0;
  std::size_t count_ = 0;
};

inline Grid1D make_grid(double length, std::size_t count) {
  return Grid1D::make(length, count);
}

/// Time-frequency product grid. Values are stored x-major: (ix, iw) at
/// ix * omega.count() + iw.
struct TFGrid {
  Grid1D x;
  Grid1D omega;

  std::size_t size() const { return x.count() * omega.count(); }
  double cell_area() const { return x.spacing() * omega.spacing(); }
  bool operator==(const TFGrid& other) const = default;
};

struct Signal {
  Grid1D grid;
  std::vector<cplx> values;

  Signal() = default;
  explicit Signal(Grid1D g) : grid(g), values(g.count(), cplx{}) {}
  Signal(Grid1D g, std::vector<cplx> v);

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t k) { return values[k]; }
  const cplx& operator[](std::size_t k) const { return values[k]; }

  Signal& operator+=(const Signal& other);
  Signal& operator-=(const Signal& other);
  Signal& operator*=(cplx s);
};

Signal operator+(Signal a, const Signal& b);
Signal operator-(Signal a, const Signal& b);
Signal operator*(cplx s, Signal a);

struct TFField {
  TFGrid grid;
  std::vector<cplx> values;

  TFField() = default;
  explicit TFField(TFGrid g) : grid(g), values(g.size(), cplx{}) {}
  TFField(TFGrid g, std::vector<cplx> v);

  std::size_t nx() const { return grid.x.count(); }
  std::size_t nw() const { return grid.omega.count(); }
  cplx& at(std::size_t ix, std::size_t iw) { return values[ix * nw() + iw]; }
  const cplx& at(std::size_t ix, std::size_t iw) const { return values[ix * nw() + iw]; }

  TFField& operator+=(const TFField& other);
  TFField& operator-=(const TFField& other);
  TFField& operator*=(cplx s);
};

TFField operator+(TFField a, const TFField& b);
TFField operator-(TFField a, const TFField& b);
TFField operator*(cplx s, TFField a);

/// Pointwise modulus as a real-valued field (zero imaginary part).
TFField modulus(const TFField& f);
Signal modulus(const Signal& f);

/// Rejects NaN/Inf samples.
void require_finite(std::span<const cplx> values, const char* what);

/// Riemann-sum L2 norm and inner product <f, g> = dx * sum f * conj(g).
double l2_norm(const Signal& f);
double l2_norm(const TFField& f);
cplx inner(const Signal& f, const Signal& g);
double sup_norm(std::span<const cplx> values);

/// Fraction of L2 mass within `frame` samples of either end of the window.
double boundary_mass_fraction(const Signal& f, std::size_t frame = 4);

/// 2^{1/4} exp(-pi (x-c)^2) exp(2 pi i eta x). Requires |c| <= L/2 - 4.
Signal gaussian(const Grid1D& grid, double center = 0.0, double modulation = 0.0);

/// n-th L2-normalized Hermite function for the weight exp(-pi x^2);
/// hermite(grid, 0) coincides with gaussian(grid).
Signal hermite(const Grid1D& grid, int n);

/// Circular shift by u (must be a multiple of dx).
Signal translate(const Signal& f, double u);

/// Multiplication by exp(2 pi i eta x) (eta must be a multiple of 1/L).
Signal modulate(const Signal& f, double eta);

/// Continuum-normalized transform F(xi) = int f(x) exp(-2 pi i x xi) dx on
/// the dual grid.
Signal fourier(const Signal& f);
Signal inverse_fourier(const Signal& spectrum);

}  // namespace stftlab
