#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stftlab/transforms.hpp"

namespace stftlab {

namespace {

constexpr double kPi = std::numbers::pi;

cplx z_at(const TFGrid& tf, std::size_t a, std::size_t b) {
  return {tf.x.point(a), tf.omega.point(b)};
}

struct Derivs {
  cplx dx;
  cplx dw;
};

Derivs centered(const TFField& f, std::size_t a, std::size_t b) {
  const double hx = f.grid.x.spacing();
  const double hw = f.grid.omega.spacing();
  return {(f.at(a + 1, b) - f.at(a - 1, b)) / (2.0 * hx),
          (f.at(a, b + 1) - f.at(a, b - 1)) / (2.0 * hw)};
}

double modulus_gradient(const TFField& f, std::size_t a, std::size_t b) {
  const double gx = (std::abs(f.at(a + 1, b)) - std::abs(f.at(a - 1, b))) / (2.0 * f.grid.x.spacing());
  const double gw = (std::abs(f.at(a, b + 1)) - std::abs(f.at(a, b - 1))) / (2.0 * f.grid.omega.spacing());
  return std::hypot(gx, gw);
}

}  // namespace

FockField to_fock(const TFField& gabor, const WindowSpec& window) {
  if (!window.is_gaussian()) throw Error("Fock view needs the Gaussian window");
  const TFGrid& tf = gabor.grid;
  const std::size_t nw = tf.omega.count();
  FockField out{TFField(tf)};
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    const double x = tf.x.point(a);
    for (std::size_t b = 0; b < nw; ++b) {
      const double w = tf.omega.point(b);
      const cplx g = gabor.at(a, (nw - b) % nw);
      out.values.at(a, b) = std::exp(kPi * (x * x + w * w) / 2.0) * std::polar(1.0, -kPi * x * w) * g;
    }
  }
  return out;
}

TFField from_fock(const FockField& fock) {
  const TFGrid& tf = fock.values.grid;
  const std::size_t nw = tf.omega.count();
  TFField out(tf);
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    const double x = tf.x.point(a);
    for (std::size_t b = 0; b < nw; ++b) {
      const double w = tf.omega.point(b);
      out.at(a, b) = std::polar(1.0, -kPi * x * w) * std::exp(-kPi * (x * x + w * w) / 2.0) *
                     fock.values.at(a, (nw - b) % nw);
    }
  }
  return out;
}

std::vector<std::uint8_t> fock_region(const TFGrid& tf, double radius, std::size_t frame) {
  const std::size_t nx = tf.x.count();
  const std::size_t nw = tf.omega.count();
  std::vector<std::uint8_t> inside(tf.size(), 0);
  for (std::size_t a = frame; a + frame < nx; ++a) {
    for (std::size_t b = frame; b + frame < nw; ++b) {
      inside[a * nw + b] = std::abs(z_at(tf, a, b)) <= radius ? 1 : 0;
    }
  }
  return inside;
}

double cauchy_riemann_residual(const FockField& fock, double radius) {
  const TFField& f = fock.values;
  const auto region = fock_region(f.grid, radius);
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t a = 1; a + 1 < f.nx(); ++a) {
    for (std::size_t b = 1; b + 1 < f.nw(); ++b) {
      if (!region[a * f.nw() + b]) continue;
      const auto d = centered(f, a, b);
      worst = std::max(worst, std::abs(0.5 * (d.dx + cplx(0, 1) * d.dw)));
      scale = std::max(scale, std::abs(f.at(a, b)));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

std::vector<std::pair<std::size_t, std::size_t>> find_zero_cells(
    const TFField& field, const std::vector<std::uint8_t>* region) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  const std::size_t nw = field.nw();
  auto in = [&](std::size_t a, std::size_t b) { return !region || (*region)[a * nw + b]; };
  auto step = [](cplx from, cplx to) { return std::arg(to / from); };
  for (std::size_t a = 0; a + 1 < field.nx(); ++a) {
    for (std::size_t b = 0; b + 1 < nw; ++b) {
      if (!in(a, b) || !in(a + 1, b) || !in(a, b + 1) || !in(a + 1, b + 1)) continue;
      const cplx c0 = field.at(a, b);
      const cplx c1 = field.at(a + 1, b);
      const cplx c2 = field.at(a + 1, b + 1);
      const cplx c3 = field.at(a, b + 1);
      if (c0 == 0.0 || c1 == 0.0 || c2 == 0.0 || c3 == 0.0) {
        cells.emplace_back(a, b);
        continue;
      }
      const double total = step(c0, c1) + step(c1, c2) + step(c2, c3) + step(c3, c0);
      if (std::abs(total) > kPi) cells.emplace_back(a, b);
    }
  }
  return cells;
}

double key_identity_residual(const FockField& fock, double radius, double floor,
                             std::size_t zero_clearance) {
  const TFField& f = fock.values;
  const std::size_t nx = f.nx();
  const std::size_t nw = f.nw();
  const auto region = fock_region(f.grid, radius);
  double peak = 0.0;
  for (std::size_t k = 0; k < region.size(); ++k) {
    if (region[k]) peak = std::max(peak, std::abs(f.values[k]));
  }
  std::vector<std::uint8_t> near_zero(f.grid.size(), 0);
  const auto c = static_cast<std::int64_t>(zero_clearance);
  for (const auto& [za, zb] : find_zero_cells(f)) {
    for (std::int64_t da = -c; da <= c + 1; ++da) {
      for (std::int64_t db = -c; db <= c + 1; ++db) {
        const std::int64_t a = static_cast<std::int64_t>(za) + da;
        const std::int64_t b = static_cast<std::int64_t>(zb) + db;
        if (a >= 0 && b >= 0 && a < static_cast<std::int64_t>(nx) && b < static_cast<std::int64_t>(nw)) {
          near_zero[a * nw + b] = 1;
        }
      }
    }
  }
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t a = 1; a + 1 < nx; ++a) {
    for (std::size_t b = 1; b + 1 < nw; ++b) {
      const std::size_t k = a * nw + b;
      if (!region[k] || near_zero[k] || std::abs(f.values[k]) <= floor * peak) continue;
      const auto d = centered(f, a, b);
      const double deriv = std::abs(0.5 * (d.dx - cplx(0, 1) * d.dw));
      worst = std::max(worst, std::abs(modulus_gradient(f, a, b) - deriv));
      scale = std::max({scale, deriv, std::abs(f.values[k])});
    }
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

double modulus_gradient_excess(const TFField& field) {
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t a = 1; a + 1 < field.nx(); ++a) {
    for (std::size_t b = 1; b + 1 < field.nw(); ++b) {
      const auto d = centered(field, a, b);
      const double full = std::sqrt(std::norm(d.dx) + std::norm(d.dw));
      worst = std::max(worst, modulus_gradient(field, a, b) - full);
      scale = std::max(scale, full);
    }
  }
  return scale > 0.0 ? std::max(0.0, worst) / scale : 0.0;
}

double monomial_fit_residual(const FockField& fock, int degree, double radius) {
  const TFField& f = fock.values;
  const auto region = fock_region(f.grid, radius, 0);
  cplx num = 0.0;
  double den = 0.0;
  for (std::size_t a = 0; a < f.nx(); ++a) {
    for (std::size_t b = 0; b < f.nw(); ++b) {
      if (!region[a * f.nw() + b]) continue;
      const cplx m = std::pow(z_at(f.grid, a, b), degree);
      num += std::conj(m) * f.at(a, b);
      den += std::norm(m);
    }
  }
  const cplx coef = den > 0.0 ? num / den : 0.0;
  double err = 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < f.nx(); ++a) {
    for (std::size_t b = 0; b < f.nw(); ++b) {
      if (!region[a * f.nw() + b]) continue;
      err += std::norm(f.at(a, b) - coef * std::pow(z_at(f.grid, a, b), degree));
      total += std::norm(f.at(a, b));
    }
  }
  return total > 0.0 ? std::sqrt(err / total) : 0.0;
}

PolynomialField fock_polynomial_field(const std::vector<cplx>& roots, const TFGrid& tf) {
  const double half_x = tf.x.length() / 2.0;
  const double half_w = tf.omega.length() / 2.0;
  for (const auto& r : roots) {
    if (std::abs(r.real()) >= half_x || std::abs(r.imag()) >= half_w) {
      throw Error("polynomial root outside the TF grid");
    }
  }
  FockField fock{TFField(tf)};
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    for (std::size_t b = 0; b < tf.omega.count(); ++b) {
      const cplx z = z_at(tf, a, b);
      cplx p = 1.0;
      for (const auto& r : roots) p *= z - r;
      fock.values.at(a, b) = p;
    }
  }
  TFField gabor = from_fock(fock);
  const std::size_t nx = tf.x.count();
  const std::size_t nw = tf.omega.count();
  double edge = 0.0;
  for (std::size_t a = 0; a < nx; ++a) {
    edge = std::max({edge, std::abs(gabor.at(a, 0)), std::abs(gabor.at(a, nw - 1))});
  }
  for (std::size_t b = 0; b < nw; ++b) {
    edge = std::max({edge, std::abs(gabor.at(0, b)), std::abs(gabor.at(nx - 1, b))});
  }
  if (edge > 1e-8 * sup_norm(gabor.values)) throw Error("TF grid too small for the weighted polynomial to decay");
  return {std::move(fock), std::move(gabor)};
}

double log_derivative_bound_ratio(const std::vector<cplx>& roots, const TFGrid& tf, double re_min) {
  if (roots.empty()) return 0.0;
  const double degree = static_cast<double>(roots.size());
  double worst = 0.0;
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    if (tf.x.point(a) < re_min) continue;
    for (std::size_t b = 0; b < tf.omega.count(); ++b) {
      const cplx z = z_at(tf, a, b);
      cplx logd = 0.0;
      double dist = std::numeric_limits<double>::infinity();
      for (const auto& r : roots) {
        logd += 1.0 / (z - r);
        dist = std::min(dist, std::abs(z - r));
      }
      if (dist == 0.0) continue;
      worst = std::max(worst, std::abs(logd) * dist / degree);
    }
  }
  return worst;
}

}  // namespace stftlab
