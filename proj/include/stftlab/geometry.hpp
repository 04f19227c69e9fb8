#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stftlab/signal.hpp"
#include "stftlab/transforms.hpp"

namespace stftlab {

struct Segment {
  double x0 = 0.0, w0 = 0.0, x1 = 0.0, w1 = 0.0;
  double length() const;
};

// A subset of the TF grid. `level` >= 0 marks inclusion; smooth level
// functions (half-planes, disks, superlevel sets) give sub-cell boundaries,
// plain boolean masks use +-1/2. The outer frame of the grid is open: it
// never contributes boundary, so the full grid has boundary length 0.
struct DomainMask {
  TFGrid grid;
  std::vector<std::uint8_t> inside;
  std::vector<double> level;

  DomainMask() = default;
  DomainMask(TFGrid g, std::vector<std::uint8_t> inside);
  static DomainMask from_level(TFGrid g, std::vector<double> level);
  static DomainMask full(const TFGrid& g);
  static DomainMask disk(const TFGrid& g, double x, double w, double radius);
  /// {(x, w) : (x, w) . (cos angle, sin angle) >= offset}
  static DomainMask half_plane(const TFGrid& g, double angle, double offset);
  static DomainMask rect(const TFGrid& g, double x0, double x1, double w0, double w1);

  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * grid.cell_area(); }
  bool empty() const { return count() == 0; }
  bool at(std::size_t ix, std::size_t iw) const { return inside[ix * grid.omega.count() + iw] != 0; }

  DomainMask operator&(const DomainMask& o) const;
  DomainMask operator|(const DomainMask& o) const;
  DomainMask minus(const DomainMask& o) const;
  bool operator==(const DomainMask& o) const { return grid == o.grid && inside == o.inside; }

  /// Marching-squares polyline of the zero level set, one segment per cell crossing.
  std::vector<Segment> boundary() const;
  double boundary_length() const;
};

/// Real, nonnegative weights from a field that must already be real and >= 0.
std::vector<double> weight_values(const TFField& w, const char* what);

/// Riemann sum of W over the mask; samples on the zero level count half.
double mask_mass(const std::vector<double>& w, const DomainMask& mask);
/// Sum over boundary segments of bilinear W at the segment midpoint times length.
double boundary_integral(const std::vector<double>& w, const DomainMask& mask);

// ---------------------------------------------------------------------------
// Cheeger constant (upper bound over candidate families).

enum CheegerFamily : unsigned { kLevelSets = 1, kDisks = 2, kHalfPlanes = 4, kAllFamilies = 7 };

struct CheegerOptions {
  unsigned families = kAllFamilies;
  std::size_t thresholds = 256;   // levels of the smoothed field, strictly between min and max
  double smoothing = 1.0;         // Gaussian blur of W, in cells (0: none)
  std::size_t disk_centers = 16;  // per axis
  std::size_t disk_radii = 16;
  std::size_t directions = 64;
  std::size_t offsets = 65;       // odd, so a cut through the central sample is among them
  double min_mass_fraction = 1e-6;  // smaller candidates only see rounding noise
};

struct CheegerCandidate {
  std::string family;  // superlevel, sublevel, disk, halfplane
  std::size_t index = 0;
  double a = 0.0, b = 0.0, c = 0.0;  // threshold | (x, w, radius) | (angle, offset, -)
  double mass = 0.0;
  double boundary = 0.0;
  double value = 0.0;  // boundary / mass, inf when inadmissible
  bool admissible = false;
};

struct CheegerReport {
  double h = 0.0;  // upper bound
  DomainMask witness;
  std::string family;
  double total_mass = 0.0;
  std::vector<CheegerCandidate> table;
};

/// min over candidates C with m int W <= int_C W <= (1/2 + 1e-6) int W of
/// int_{dC} W / int_C W. Ties go to the lowest candidate index.
CheegerReport cheeger_estimate(const TFField& w, const CheegerOptions& options = {});

// ---------------------------------------------------------------------------
// Connectivity, gluing, circle average.

/// ||W||_{L2(A & B)} / (||W||_{L2(A)} + ||W||_{L2(B)}).
double connectivity(const TFField& w, const DomainMask& a, const DomainMask& b);

/// (c_A^2 + c_B^2)^{1/2} (1/lambda + sqrt 2).
double gluing_bound(double c_a, double c_b, double lambda);

struct CircleAverage {
  cplx tau0;
  double dist_a = 0.0;  // |tau_A - tau0|
  double dist_b = 0.0;  // |tau_B - tau0|
  bool equidistant = false;
  bool within_half_chord = false;  // max(dist) <= 2^{-1/2} |tau_A - tau_B|
};

/// Printed rule (tau_A - tau_B)/|tau_A - tau_B|, i tau_A when tau_A = -tau_B,
/// tau_A when they coincide. `midpoint` switches to (tau_A + tau_B)/|tau_A + tau_B|.
CircleAverage circle_average(cplx tau_a, cplx tau_b, bool midpoint = false);

/// (||<z>^r u||^2 + |||grad u|||^2)^{1/2} over the mask, centered differences
/// on the full grid so the norm is monotone in the mask.
double h1_norm(const TFField& u, const DomainMask& mask, double r = 0.0);

// ---------------------------------------------------------------------------
// Poincare constant, p = 2.

std::size_t component_count(const DomainMask& mask);

struct PoincareOptions {
  bool gaussian_measure = false;  // multiply W by exp(-pi |z|^2)
  double clip = 1e-30;
  int max_iterations = 400;
  double tolerance = 1e-10;
  std::size_t block = 6;
};

struct PoincareReport {
  double mu1 = 0.0;
  double constant = 0.0;  // 1 / sqrt(mu1), inf when disconnected
  bool connected = true;
  std::size_t components = 0;
  std::size_t clipped = 0;
  int iterations = 0;
  std::string status;  // "ok", "disconnected", "not_converged"
};

/// Smallest nonzero eigenvalue of the weighted Neumann graph Laplacian on
/// the mask: vertex masses W gamma dA, edge conductances from finite differences.
PoincareReport poincare_constant(const DomainMask& omega, const TFField& weight, const PoincareOptions& options = {});

/// Most negative Hessian eigenvalue of -log(W gamma) over interior mask
/// points (>= 0 means log-concave on the grid).
double log_concavity_margin(const TFField& weight, const DomainMask& mask, bool gaussian_measure = true);

// ---------------------------------------------------------------------------
// Stability certificate on a domain, p = 2, Gaussian measure.

struct CertificateOptions {
  double p = 2.0;  // only 2 is supported
  double zero_radius_cells = 3.0;
  double floor = 1e-6;
};

struct CertificateReport {
  double t1 = 0.0;  // || |F1| - |F2| ||
  double t2 = 0.0;  // || grad|F1| - grad|F2| ||
  double t3 = 0.0;  // || grad|F1| / |F1| (|F1| - |F2|) ||
  double poincare = 0.0;
  double bound = 0.0;  // t1 + 2 sqrt 2 C_P (t2 + t3)
  double distance = 0.0;
  cplx lambda{1.0, 0.0};
  std::size_t excised_zeros = 0;
  double excised_fraction = 0.0;
  DomainMask domain;
  bool holds = false;
};

CertificateReport stability_certificate(const FockField& f1, const FockField& f2, const DomainMask& omega,
                                        const CertificateOptions& options = {});

}  // namespace stftlab
