#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "stftlab/geometry.hpp"
#include "stftlab/parallel.hpp"

namespace stftlab {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> blur(const std::vector<double>& w, const TFGrid& g, double sigma) {
  if (sigma <= 0.0) return w;
  const std::size_t nx = g.x.count(), nw = g.omega.count();
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) ksum += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& k : kernel) k /= ksum;

  std::vector<double> tmp(w.size(), 0.0), out(w.size(), 0.0);
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < nw; ++b) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const auto bb = static_cast<std::ptrdiff_t>(b) + i;
        if (bb >= 0 && bb < static_cast<std::ptrdiff_t>(nw)) acc += kernel[i + radius] * w[a * nw + bb];
      }
      tmp[a * nw + b] = acc;
    }
  }
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < nw; ++b) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const auto aa = static_cast<std::ptrdiff_t>(a) + i;
        if (aa >= 0 && aa < static_cast<std::ptrdiff_t>(nx)) acc += kernel[i + radius] * tmp[aa * nw + b];
      }
      out[a * nw + b] = acc;
    }
  }
  return out;
}

enum Kind { kSuper, kSub, kDisk, kPlane };
const char* const kKindNames[] = {"superlevel", "sublevel", "disk", "halfplane"};

struct CandidateSpec {
  Kind kind;
  double a, b, c;
};

}  // namespace

CheegerReport cheeger_estimate(const TFField& w, const CheegerOptions& opt) {
  const auto wv = weight_values(w, "cheeger");
  const TFGrid& g = w.grid;
  const std::size_t nx = g.x.count(), nw = g.omega.count();
  CheegerReport report;
  report.total_mass = 0.0;
  for (double v : wv) report.total_mass += v;
  report.total_mass *= g.cell_area();
  if (!(report.total_mass > 0.0)) throw Error("cheeger: zero field");

  std::vector<CandidateSpec> specs;
  std::vector<double> smooth;
  if (opt.families & kLevelSets) {
    smooth = blur(wv, g, opt.smoothing);
    const auto [lo_it, hi_it] = std::minmax_element(smooth.begin(), smooth.end());
    const double lo = *lo_it, hi = *hi_it;
    for (std::size_t i = 1; i <= opt.thresholds; ++i) {
      specs.push_back({kSuper, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opt.thresholds + 1), 0, 0});
    }
    for (std::size_t i = 1; i <= opt.thresholds; ++i) {
      specs.push_back({kSub, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opt.thresholds + 1), 0, 0});
    }
  }
  const double x_lo = g.x.point(0), x_hi = g.x.point(nx - 1);
  const double w_lo = g.omega.point(0), w_hi = g.omega.point(nw - 1);
  if (opt.families & kDisks) {
    const std::size_t n = opt.disk_centers;
    const double rmin = 2.0 * std::max(g.x.spacing(), g.omega.spacing());
    const double rmax = 0.5 * std::min(x_hi - x_lo, w_hi - w_lo);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double cx = x_lo + (x_hi - x_lo) * (i + 0.5) / n;
        const double cw = w_lo + (w_hi - w_lo) * (j + 0.5) / n;
        for (std::size_t k = 0; k < opt.disk_radii; ++k) {
          const double t = opt.disk_radii > 1 ? static_cast<double>(k) / (opt.disk_radii - 1) : 0.0;
          specs.push_back({kDisk, cx, cw, rmin + (rmax - rmin) * t});
        }
      }
    }
  }
  // Cuts are placed relative to the central sample, which is a grid point.
  const double cx = g.x.point(nx / 2), cw = g.omega.point(nw / 2);
  if (opt.families & kHalfPlanes) {
    double reach = 0.0;
    for (double x : {x_lo, x_hi}) {
      for (double y : {w_lo, w_hi}) reach = std::max(reach, std::hypot(x - cx, y - cw));
    }
    const std::size_t k = std::max<std::size_t>(opt.offsets, 1);
    for (std::size_t d = 0; d < opt.directions; ++d) {
      const double angle = 2.0 * kPi * static_cast<double>(d) / static_cast<double>(opt.directions);
      for (std::size_t m = 0; m < k; ++m) {
        const double off = k > 1 ? reach * (2.0 * static_cast<double>(m) / static_cast<double>(k - 1) - 1.0) : 0.0;
        specs.push_back({kPlane, angle, off, 0});
      }
    }
  }
  if (specs.empty()) throw Error("cheeger: no candidate families selected");

  auto make_mask = [&](const CandidateSpec& s) {
    std::vector<double> level(g.size());
    const double ca = std::cos(s.a), sa = std::sin(s.a);
    for (std::size_t a = 0; a < nx; ++a) {
      const double x = g.x.point(a);
      for (std::size_t b = 0; b < nw; ++b) {
        const double y = g.omega.point(b);
        const std::size_t k = a * nw + b;
        if (s.kind == kSuper) {
          level[k] = smooth[k] - s.a;
        } else if (s.kind == kSub) {
          level[k] = s.a - smooth[k];
        } else if (s.kind == kDisk) {
          level[k] = s.c - std::hypot(x - s.a, y - s.b);
        } else {
          level[k] = (x - cx) * ca + (y - cw) * sa - s.b;
        }
      }
    }
    return DomainMask::from_level(g, std::move(level));
  };

  report.table.resize(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    const auto mask = make_mask(specs[i]);
    CheegerCandidate& c = report.table[i];
    c.family = kKindNames[specs[i].kind];
    c.index = i;
    c.a = specs[i].a;
    c.b = specs[i].b;
    c.c = specs[i].c;
    c.mass = mask_mass(wv, mask);
    c.boundary = boundary_integral(wv, mask);
    c.admissible = c.mass > 0.0 && c.mass >= opt.min_mass_fraction * report.total_mass &&
                   c.mass <= (0.5 + 1e-6) * report.total_mass;
    c.value = c.admissible ? c.boundary / c.mass : std::numeric_limits<double>::infinity();
  });

  std::size_t best = specs.size();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (report.table[i].admissible && (best == specs.size() || report.table[i].value < report.table[best].value)) best = i;
  }
  if (best == specs.size()) throw Error("cheeger: no admissible candidate");
  report.h = report.table[best].value;
  report.family = report.table[best].family;
  report.witness = make_mask(specs[best]);
  return report;
}

double connectivity(const TFField& w, const DomainMask& a, const DomainMask& b) {
  if (!(a.grid == w.grid) || !(b.grid == w.grid)) throw Error("connectivity: grids differ");
  const auto wv = weight_values(w, "connectivity");
  double na = 0.0, nb = 0.0, nab = 0.0;
  for (std::size_t k = 0; k < wv.size(); ++k) {
    const double v = wv[k] * wv[k];
    if (a.inside[k]) na += v;
    if (b.inside[k]) nb += v;
    if (a.inside[k] && b.inside[k]) nab += v;
  }
  if (!(nab > 0.0)) throw Error("connectivity: overlap carries no mass");
  return std::sqrt(nab) / (std::sqrt(na) + std::sqrt(nb));
}

double gluing_bound(double c_a, double c_b, double lambda) {
  if (!(lambda > 0.0)) throw Error("gluing: lambda must be positive");
  if (lambda > 0.5 + 1e-12) throw Error("gluing: lambda cannot exceed 1/2");
  if (c_a < 0.0 || c_b < 0.0) throw Error("gluing: constants must be nonnegative");
  return std::hypot(c_a, c_b) * (1.0 / lambda + std::numbers::sqrt2);
}

CircleAverage circle_average(cplx tau_a, cplx tau_b, bool midpoint) {
  if (std::abs(std::abs(tau_a) - 1.0) > 1e-12 || std::abs(std::abs(tau_b) - 1.0) > 1e-12) {
    throw Error("circle average: inputs must be unimodular");
  }
  CircleAverage out;
  const double chord = std::abs(tau_a - tau_b);
  if (chord == 0.0) {
    out.tau0 = tau_a;
  } else if (std::abs(tau_a + tau_b) <= 1e-12) {
    out.tau0 = cplx(0.0, 1.0) * tau_a;
  } else if (midpoint) {
    out.tau0 = (tau_a + tau_b) / std::abs(tau_a + tau_b);
  } else {
    out.tau0 = (tau_a - tau_b) / chord;
  }
  out.dist_a = std::abs(tau_a - out.tau0);
  out.dist_b = std::abs(tau_b - out.tau0);
  out.equidistant = std::abs(out.dist_a - out.dist_b) <= 1e-12;
  out.within_half_chord = std::max(out.dist_a, out.dist_b) <= chord / std::numbers::sqrt2 + 1e-12;
  return out;
}

double h1_norm(const TFField& u, const DomainMask& mask, double r) {
  if (!(u.grid == mask.grid)) throw Error("h1 norm: grids differ");
  const std::size_t nx = u.nx(), nw = u.nw();
  const double dx = u.grid.x.spacing(), dw = u.grid.omega.spacing();
  double acc = 0.0;
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < nw; ++b) {
      if (!mask.at(a, b)) continue;
      const std::size_t a0 = a == 0 ? 0 : a - 1, a1 = a + 1 == nx ? a : a + 1;
      const std::size_t b0 = b == 0 ? 0 : b - 1, b1 = b + 1 == nw ? b : b + 1;
      const cplx gx = (u.at(a1, b) - u.at(a0, b)) / (dx * static_cast<double>(a1 - a0));
      const cplx gw = (u.at(a, b1) - u.at(a, b0)) / (dw * static_cast<double>(b1 - b0));
      const double x = u.grid.x.point(a), y = u.grid.omega.point(b);
      const double weight = r == 0.0 ? 1.0 : std::pow(1.0 + x * x + y * y, r);
      acc += weight * std::norm(u.at(a, b)) + std::norm(gx) + std::norm(gw);
    }
  }
  return std::sqrt(acc * u.grid.cell_area());
}

std::size_t component_count(const DomainMask& mask) {
  const std::size_t nx = mask.grid.x.count(), nw = mask.grid.omega.count();
  std::vector<std::uint8_t> seen(mask.inside.size(), 0);
  std::size_t components = 0;
  std::queue<std::size_t> todo;
  for (std::size_t start = 0; start < seen.size(); ++start) {
    if (!mask.inside[start] || seen[start]) continue;
    ++components;
    seen[start] = 1;
    todo.push(start);
    while (!todo.empty()) {
      const std::size_t k = todo.front();
      todo.pop();
      const std::size_t a = k / nw, b = k % nw;
      const std::size_t nbr[4] = {a > 0 ? k - nw : k, a + 1 < nx ? k + nw : k, b > 0 ? k - 1 : k, b + 1 < nw ? k + 1 : k};
      for (std::size_t n : nbr) {
        if (n != k && mask.inside[n] && !seen[n]) {
          seen[n] = 1;
          todo.push(n);
        }
      }
    }
  }
  return components;
}

double log_concavity_margin(const TFField& weight, const DomainMask& mask, bool gaussian_measure) {
  if (!(weight.grid == mask.grid)) throw Error("log-concavity: grids differ");
  const auto wv = weight_values(weight, "log-concavity");
  const TFGrid& g = weight.grid;
  const std::size_t nx = g.x.count(), nw = g.omega.count();
  const double dx = g.x.spacing(), dw = g.omega.spacing();
  auto v = [&](std::size_t a, std::size_t b) {
    const double x = g.x.point(a), y = g.omega.point(b);
    return -std::log(wv[a * nw + b]) + (gaussian_measure ? kPi * (x * x + y * y) : 0.0);
  };
  double margin = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t a = 1; a + 1 < nx; ++a) {
    for (std::size_t b = 1; b + 1 < nw; ++b) {
      bool ok = true;
      for (int i = -1; i <= 1 && ok; ++i) {
        for (int j = -1; j <= 1 && ok; ++j) {
          const std::size_t k = (a + i) * nw + (b + j);
          ok = mask.inside[k] && wv[k] > 0.0;
        }
      }
      if (!ok) continue;
      any = true;
      const double c = v(a, b);
      const double hxx = (v(a + 1, b) - 2 * c + v(a - 1, b)) / (dx * dx);
      const double hww = (v(a, b + 1) - 2 * c + v(a, b - 1)) / (dw * dw);
      const double hxw = (v(a + 1, b + 1) - v(a + 1, b - 1) - v(a - 1, b + 1) + v(a - 1, b - 1)) / (4 * dx * dw);
      const double mean = 0.5 * (hxx + hww);
      const double rad = std::hypot(0.5 * (hxx - hww), hxw);
      margin = std::min(margin, mean - rad);
    }
  }
  if (!any) throw Error("log-concavity: no interior points with positive weight");
  return margin;
}

}  // namespace stftlab
