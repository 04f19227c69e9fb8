#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stftlab/signal.hpp"

namespace stftlab {

/// Analysis window: the Gaussian, a Hermite function, or explicit samples.
class WindowSpec {
 public:
  enum class Kind { gaussian, hermite, sampled };

  static WindowSpec gaussian() { return WindowSpec(Kind::gaussian, 0, std::nullopt); }
  static WindowSpec hermite(int order);
  /// Samples must have unit L2 norm within 1e-6.
  static WindowSpec sampled(Signal samples);
  /// No normalization check; used for cross-ambiguity of arbitrary signals.
  static WindowSpec sampled_unchecked(Signal samples) {
    return WindowSpec(Kind::sampled, 0, std::move(samples));
  }

  Kind kind() const { return kind_; }
  int order() const { return order_; }
  bool is_gaussian() const { return kind_ == Kind::gaussian || (kind_ == Kind::hermite && order_ == 0); }
  std::string name() const;

  /// Window samples on `grid` (sampled windows must already live there).
  Signal on(const Grid1D& grid) const;

 private:
  WindowSpec(Kind kind, int order, std::optional<Signal> samples)
      : kind_(kind), order_(order), samples_(std::move(samples)) {}

  Kind kind_;
  int order_;
  std::optional<Signal> samples_;
};

/// TF grid whose x-axis is a centered sub-window of `signal` with `x_count`
/// points over `x_extent` (all on signal samples) and whose omega-axis is
/// the full dual grid of `signal`.
TFGrid stft_grid(const Grid1D& signal, double x_extent, std::size_t x_count);

/// x-axis equal to the signal grid, omega-axis its dual.
TFGrid full_stft_grid(const Grid1D& signal);

/// Square self-dual grid (L^2 = N), required by the ambiguity relation.
TFGrid self_dual_grid(const Grid1D& signal);
bool is_self_dual(const TFGrid& tf);

/// V_phi f(x, w) = int f(t) conj(phi(t - x)) exp(-2 pi i t w) dt, one
/// windowed FFT per x-column.
TFField stft(const Signal& f, const WindowSpec& window, const TFGrid& tf);

/// sup |V_phi(T_u M_eta f) - exp(-2 pi i u w) V_phi f(x - u, w - eta)|.
/// u must be a multiple of the TF x-spacing and eta of the omega spacing.
double covariance_residual(const Signal& f, const WindowSpec& window, const TFGrid& tf, double u,
                           double eta);

/// A f(x, w) = exp(pi i x w) V_f f(x, w).
TFField ambiguity(const Signal& f, const TFGrid& tf);
TFField ambiguity(const Signal& f);

/// |V_phi f|^2 as a real field.
TFField phaseless(const Signal& f, const WindowSpec& window, const TFGrid& tf);

/// Relative sup residual of F(|V_phi f|^2)(w, -x) = A f(x, w) conj(A phi(x, w))
/// on the self-dual grid of f.
double ambiguity_relation_residual(const Signal& f, const WindowSpec& window);

/// 2D transform of a measurement evaluated at (w, -x), i.e. the left side
/// of the ambiguity relation, on a self-dual grid.
TFField measurement_spectrum(const TFField& measurement);

// ---------------------------------------------------------------------------
// Fock-space view of Gabor fields.

/// Samples of an entire function F on the TF plane, z = x + i w.
/// Convention: F(z) = exp(pi |z|^2 / 2) exp(-pi i x w) G f(x, -w).
struct FockField {
  TFField values;
  std::string convention = "bargmann";
};

/// Strips the Gaussian weight and unimodular factor from a Gabor field.
/// `window` must be the Gaussian.
FockField to_fock(const TFField& gabor, const WindowSpec& window);

/// Inverse of to_fock: G f(x, w) = exp(-pi i x w) exp(-pi |z|^2/2) F(x - i w).
TFField from_fock(const FockField& fock);

/// Interior region used by the discrete Fock diagnostics: points at least
/// `frame` cells from the grid edge with |z| <= radius.
std::vector<std::uint8_t> fock_region(const TFGrid& tf, double radius, std::size_t frame = 2);

/// max |dF/dzbar| / max |F| over the region, centered differences.
double cauchy_riemann_residual(const FockField& fock, double radius = 2.0);

/// Cells (ix, iw) whose corner phases wind around zero; each contains a zero
/// of the field. Only cells fully inside `region` (if given) are scanned.
std::vector<std::pair<std::size_t, std::size_t>> find_zero_cells(
    const TFField& field, const std::vector<std::uint8_t>* region = nullptr);

/// max | |grad|F|| - |F'| | / max(|F'|, |F|) over the region, restricted to
/// |F| > floor * max|F| and to points at least `zero_clearance` cells from
/// any detected zero.
double key_identity_residual(const FockField& fock, double radius = 2.0, double floor = 1e-3,
                             std::size_t zero_clearance = 3);

/// Largest violation of |grad|F|| <= |grad F| (Frobenius), centered
/// differences, relative to max |grad F|. Holds for any complex field.
double modulus_gradient_excess(const TFField& field);

/// Least-squares fit of F on |z| <= radius by a multiple of z^degree;
/// returns the relative L2 residual.
double monomial_fit_residual(const FockField& fock, int degree, double radius = 2.0);

struct PolynomialField {
  FockField fock;
  TFField gabor;
};

/// F(z) = prod (z - root); the Gabor-weighted field must decay below 1e-8
/// of its maximum on the grid boundary.
PolynomialField fock_polynomial_field(const std::vector<cplx>& roots, const TFGrid& tf);

/// max over grid points with Re z >= re_min of |p'/p| dist(z, roots) / deg.
/// Never exceeds 1 because p'/p = sum 1 / (z - root).
double log_derivative_bound_ratio(const std::vector<cplx>& roots, const TFGrid& tf, double re_min);

// ---------------------------------------------------------------------------

struct RecoveryResult {
  Signal signal;
  double masked_fraction = 0.0;
  double tau = 0.0;
  std::size_t anchor_index = 0;
};

/// Ambiguity-function inversion of a phaseless measurement on the self-dual
/// grid of the signal. Cells with |A phi| < tau are discarded; tau <= 0
/// selects 1e-6 * |A phi(0, 0)|.
RecoveryResult recover(const TFField& measurement, const Grid1D& signal_grid,
                       const WindowSpec& window, double tau = 0.0);

struct WindowRatio {
  TFField ratio;                                 // <(x, w)> |A phi / A Phi|
  double grid_sup = 0.0;                         // sup over grid cells
  double sup = 0.0;                              // infinity if A Phi vanishes
  std::vector<std::pair<double, double>> zeros;  // zero-locus sample points
  std::size_t unresolved = 0;                    // cells where both sides sit at the FFT noise floor
};

/// Closed form L_n(pi r^2) exp(-pi r^2 / 2) of the ambiguity function of
/// hermite(n) (n = 0 is the Gaussian).
double hermite_ambiguity(int n, double x, double w);

/// <(x, w)> |A phi(x, w) / A Phi(x, w)| for phi, Phi on the full grid of
/// `signal_grid`. Gaussian/Hermite windows use the closed form, so the
/// Gaussian factors cancel exactly; sampled windows use the FFT and skip
/// cells where both ambiguity functions are below 1e-13 of their peak.
WindowRatio window_comparison_ratio(const WindowSpec& phi, const WindowSpec& Phi,
                                    const Grid1D& signal_grid);

}  // namespace stftlab
