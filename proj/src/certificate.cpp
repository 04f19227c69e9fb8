#include <cmath>
#include <limits>
#include <numbers>

#include "stftlab/geometry.hpp"
#include "stftlab/norms.hpp"

namespace stftlab {

namespace {

struct Grad {
  double x, w;
};

std::vector<Grad> gradient(const std::vector<double>& f, const TFGrid& g) {
  const std::size_t nx = g.x.count(), nw = g.omega.count();
  std::vector<Grad> out(f.size());
  for (std::size_t a = 0; a < nx; ++a) {
    const std::size_t a0 = a == 0 ? 0 : a - 1, a1 = a + 1 == nx ? a : a + 1;
    for (std::size_t b = 0; b < nw; ++b) {
      const std::size_t b0 = b == 0 ? 0 : b - 1, b1 = b + 1 == nw ? b : b + 1;
      out[a * nw + b] = {(f[a1 * nw + b] - f[a0 * nw + b]) / (g.x.spacing() * static_cast<double>(a1 - a0)),
                         (f[a * nw + b1] - f[a * nw + b0]) / (g.omega.spacing() * static_cast<double>(b1 - b0))};
    }
  }
  return out;
}

}  // namespace

CertificateReport stability_certificate(const FockField& f1, const FockField& f2, const DomainMask& omega,
                                        const CertificateOptions& opt) {
  if (opt.p != 2.0) throw Error("certificate: only p = 2 is supported");
  const TFGrid& g = omega.grid;
  if (!(f1.values.grid == g) || !(f2.values.grid == g)) throw Error("certificate: grids differ");
  const std::size_t nw = g.omega.count();
  const double dx = g.x.spacing(), dw = g.omega.spacing();

  CertificateReport rep;
  DomainMask dom = omega;
  const auto zeros = find_zero_cells(f1.values, &omega.inside);
  rep.excised_zeros = zeros.size();
  const double radius = opt.zero_radius_cells * std::max(dx, dw);
  for (const auto& [a, b] : zeros) {
    dom = dom.minus(DomainMask::disk(g, g.x.point(a) + 0.5 * dx, g.omega.point(b) + 0.5 * dw, radius));
  }
  const std::size_t before = omega.count();
  if (before == 0) throw Error("certificate: empty domain");
  rep.excised_fraction = 1.0 - static_cast<double>(dom.count()) / static_cast<double>(before);

  std::vector<double> m1(g.size()), m2(g.size()), gamma(g.size());
  double peak = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    m1[k] = std::abs(f1.values.values[k]);
    m2[k] = std::abs(f2.values.values[k]);
    const double x = g.x.point(k / nw), y = g.omega.point(k % nw);
    gamma[k] = std::exp(-std::numbers::pi * (x * x + y * y));
    if (dom.inside[k]) peak = std::max(peak, m1[k]);
  }
  if (!(peak > 0.0)) throw Error("certificate: F1 vanishes on the domain");
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (dom.inside[k] && m1[k] <= opt.floor * peak) {
      throw Error("certificate: |F1| falls below the floor on the domain after zero excision");
    }
  }

  const auto g1 = gradient(m1, g);
  const auto g2 = gradient(m2, g);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  TFField weight(g);
  TFField w1(g), w2(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    weight.values[k] = m1[k] * m1[k];
    const double root = std::sqrt(gamma[k]);
    w1.values[k] = root * f1.values.values[k];
    w2.values[k] = root * f2.values.values[k];
    if (!dom.inside[k]) continue;
    const double d = m1[k] - m2[k];
    const double ex = g1[k].x - g2[k].x, ew = g1[k].w - g2[k].w;
    s1 += gamma[k] * d * d;
    s2 += gamma[k] * (ex * ex + ew * ew);
    s3 += gamma[k] * (g1[k].x * g1[k].x + g1[k].w * g1[k].w) / (m1[k] * m1[k]) * d * d;
  }
  const double area = g.cell_area();
  rep.t1 = std::sqrt(s1 * area);
  rep.t2 = std::sqrt(s2 * area);
  rep.t3 = std::sqrt(s3 * area);

  PoincareOptions popt;
  popt.gaussian_measure = true;
  rep.poincare = poincare_constant(dom, weight, popt).constant;
  rep.bound = rep.t1 + 2.0 * std::numbers::sqrt2 * rep.poincare * (rep.t2 + rep.t3);
  if (std::isnan(rep.bound)) rep.bound = std::numeric_limits<double>::infinity();

  const auto dist = phase_inf_distance(w1, w2, DistanceNorm::lq(2.0), &dom.inside);
  rep.distance = dist.distance;
  rep.lambda = dist.lambda;
  rep.holds = rep.bound >= rep.distance;
  rep.domain = std::move(dom);
  return rep;
}

}  // namespace stftlab
