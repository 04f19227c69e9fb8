#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stftlab/geometry.hpp"
#include "stftlab/io.hpp"
#include "test_util.hpp"

using namespace stftlab;

namespace {

constexpr double kPi = std::numbers::pi;

TFGrid square_grid(double length, std::size_t n) { return {make_grid(length, n), make_grid(length, n)}; }

template <typename Fn>
TFField field(const TFGrid& tf, Fn&& fn) {
  TFField out(tf);
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    for (std::size_t b = 0; b < tf.omega.count(); ++b) out.at(a, b) = fn(tf.x.point(a), tf.omega.point(b));
  }
  return out;
}

TFField ones(const TFGrid& tf) {
  return field(tf, [](double, double) { return 1.0; });
}

FockField polynomial(const TFGrid& tf, const std::vector<cplx>& roots, cplx lead = 1.0) {
  FockField f;
  f.values = field(tf, [&](double x, double w) {
    cplx v = lead;
    for (auto r : roots) v *= cplx(x, w) - r;
    return v;
  });
  return f;
}

DomainMask dumbbell(const TFGrid& tf, double neck) {
  return DomainMask::disk(tf, -1.6, 0.0, 1.0) | DomainMask::disk(tf, 1.6, 0.0, 1.0) |
         DomainMask::rect(tf, -1.6, 1.6, -neck / 2, neck / 2);
}

}  // namespace

TEST_CASE("mask boundaries") {
  const auto tf = square_grid(8, 128);
  const double h = tf.x.spacing();
  const double lo = tf.x.point(0), hi = tf.x.point(127);
  CHECK(DomainMask::full(tf).boundary_length() == 0.0);
  CHECK(DomainMask::full(tf).count() == 128 * 128);

  // Vertical cut: one segment per cell row.
  CHECK(DomainMask::half_plane(tf, 0.0, 0.3).boundary_length() == doctest::Approx(hi - lo).epsilon(1e-12));
  // Oblique cut through the centre of the sample box: the clipped chord.
  const double angle = 0.4;
  const double centre = 0.5 * (lo + hi);
  const double offset = centre * (std::cos(angle) + std::sin(angle));
  const double chord = (hi - lo) / std::cos(angle);  // exits through the top/bottom edges
  CHECK(DomainMask::half_plane(tf, angle, offset).boundary_length() == doctest::Approx(chord).epsilon(1e-12));

  const double r = 1.3;
  CHECK(DomainMask::disk(tf, 0.2, -0.1, r).boundary_length() == doctest::Approx(2 * kPi * r).epsilon(2e-3));
  CHECK(DomainMask::disk(tf, 0.0, 0.0, 1.0).area() == doctest::Approx(kPi).epsilon(0.02));

  // Constant weight on a straight cut integrates to the chord length exactly.
  const auto w = std::vector<double>(tf.size(), 2.5);
  CHECK(boundary_integral(w, DomainMask::half_plane(tf, angle, offset)) == doctest::Approx(2.5 * chord).epsilon(1e-12));
  CHECK(mask_mass(w, DomainMask::full(tf)) == doctest::Approx(2.5 * 64).epsilon(1e-12));

  const auto a = DomainMask::rect(tf, -1, 1, -1, 1);
  const auto b = DomainMask::disk(tf, 1, 0, 1);
  const auto both = a & b, either = a | b, diff = a.minus(b);
  for (std::size_t k = 0; k < tf.size(); ++k) {
    CHECK(both.inside[k] == (a.inside[k] && b.inside[k]));
    CHECK(either.inside[k] == (a.inside[k] || b.inside[k]));
    CHECK(diff.inside[k] == (a.inside[k] && !b.inside[k]));
  }
  CHECK(a.minus(a).empty());
  CHECK(h > 0);
}

TEST_CASE("masks through the run-length container") {
  const auto tf = square_grid(4, 64);
  const auto m = DomainMask::disk(tf, 0.3, 0.2, 1.1);
  std::stringstream buf;
  io::write_container(buf, io::MaskBlob{tf, m.inside});
  const auto back = std::get<io::MaskBlob>(io::read_container(buf));
  CHECK(back.grid == tf);
  CHECK(DomainMask(back.grid, back.inside) == m);
}

TEST_CASE("cheeger estimate for two separated bumps") {
  const auto tf = square_grid(32, 128);
  CheegerOptions opt;
  opt.families = kHalfPlanes | kDisks;
  opt.directions = 8;
  opt.disk_centers = 8;
  opt.disk_radii = 8;
  double prev = std::numeric_limits<double>::infinity();
  for (double d : {2.0, 4.0, 8.0, 10.0}) {
    CAPTURE(d);
    const auto w = field(tf, [&](double x, double y) {
      return 0.5 * std::exp(-kPi * ((x - d / 2) * (x - d / 2) + y * y) / 2) +
             0.5 * std::exp(-kPi * ((x + d / 2) * (x + d / 2) + y * y) / 2);
    });
    const auto rep = cheeger_estimate(w, opt);
    // Vertical cut between the bumps: sqrt(2) exp(-pi d^2 / 8) over unit mass.
    const double cut = std::sqrt(2.0) * std::exp(-kPi * d * d / 8);
    CHECK(rep.h == doctest::Approx(cut).epsilon(1e-6));
    CHECK(rep.h < prev);
    if (d >= 8) CHECK(rep.h < std::exp(-d * d / 16));
    CHECK(mask_mass(weight_values(w, "w"), rep.witness) <= (0.5 + 1e-6) * rep.total_mass);
    prev = rep.h;
  }
}

TEST_CASE("cheeger estimate for the gaussian spectrogram") {
  double values[2];
  int i = 0;
  for (std::size_t n : {128u, 256u}) {
    const auto g = make_grid(16, n);
    const auto tf = stft_grid(g, 16, n);
    const auto w = modulus(stft(gaussian(g), WindowSpec::gaussian(), tf));
    CheegerOptions opt;
    opt.thresholds = 64;
    opt.disk_centers = 8;
    opt.disk_radii = 8;
    const auto rep = cheeger_estimate(w, opt);
    CHECK(rep.h > 0);
    CHECK(std::isfinite(rep.h));
    // Half-plane through the centre of exp(-pi |z|^2 / 2): sqrt 2 over half of 2.
    CHECK(rep.h <= std::sqrt(2.0) * (1 + 1e-3));
    values[i++] = rep.h;
  }
  CHECK(std::abs(values[1] / values[0] - 1) < 0.1);
}

TEST_CASE("cheeger candidate families") {
  const auto tf = square_grid(16, 128);
  // Smoothed disk plateau on a broad low shelf that carries most of the mass.
  const auto plateau = field(tf, [](double x, double y) {
    const double r = std::hypot(x, y);
    return 0.9 * 0.5 * std::erfc(8 * (r - 1)) + 0.1 * 0.5 * std::erfc(8 * (r - 6));
  });
  CheegerOptions opt;
  opt.families = kLevelSets | kHalfPlanes;
  opt.directions = 16;
  const auto rep = cheeger_estimate(plateau, opt);
  CHECK(rep.family == "superlevel");
  double best_level = 1e300, best_plane = 1e300;
  for (const auto& c : rep.table) {
    if (c.family == "superlevel" || c.family == "sublevel") best_level = std::min(best_level, c.value);
    if (c.family == "halfplane") best_plane = std::min(best_plane, c.value);
  }
  CHECK(best_level < best_plane);

  // A refined ladder contains the coarse one.
  CheegerOptions coarse;
  coarse.families = kLevelSets;
  coarse.thresholds = 31;
  CheegerOptions fine = coarse;
  fine.thresholds = 63;
  const auto w = field(tf, [](double x, double y) { return std::exp(-kPi * (x * x + 2 * y * y)) + 0.3 * std::exp(-kPi * ((x - 2) * (x - 2) + y * y)); });
  CHECK(cheeger_estimate(w, fine).h <= cheeger_estimate(w, coarse).h);

  CHECK_THROWS_AS(cheeger_estimate(TFField(tf)), Error);
  auto neg = w;
  neg.values[5] = -1.0;
  CHECK_THROWS_AS(cheeger_estimate(neg), Error);
}

TEST_CASE("connectivity") {
  const auto tf = square_grid(16, 256);
  const auto w = field(tf, [](double x, double y) { return std::exp(-kPi * (x * x + y * y) / 2); });
  const auto all = DomainMask::full(tf);
  CHECK(connectivity(w, all, all) == 0.5);

  // A = {x >= -a}, B = {x <= a}. ||W||^2 over a strip is a 1D Gaussian integral.
  const double a = 0.5;
  const auto ma = DomainMask::half_plane(tf, 0.0, -a);
  const auto mb = DomainMask::half_plane(tf, kPi, -a);
  const double strip = std::erf(a * std::sqrt(kPi));
  const double half = 0.5 * (1 + strip);
  const double oracle = std::sqrt(strip) / (2 * std::sqrt(half));
  CHECK(connectivity(w, ma, mb) == doctest::Approx(oracle).epsilon(0.02));
  CHECK(connectivity(w, ma, mb) <= 0.5);

  const auto left = DomainMask::half_plane(tf, kPi, 1.0);
  const auto right = DomainMask::half_plane(tf, 0.0, 1.0);
  CHECK_THROWS_AS(connectivity(w, left, right), Error);
  // Overlap only where W is identically zero.
  const auto box = field(tf, [](double x, double) { return std::abs(x) > 1 ? 1.0 : 0.0; });
  CHECK_THROWS_AS(connectivity(box, DomainMask::half_plane(tf, 0.0, -0.5), DomainMask::half_plane(tf, kPi, -0.5)), Error);
}

TEST_CASE("gluing bound and circle average") {
  CHECK(gluing_bound(1, 1, 0.5) == doctest::Approx(std::sqrt(2.0) * (2 + std::sqrt(2.0))).epsilon(1e-15));
  CHECK(gluing_bound(0, 0, 0.3) == 0.0);
  CHECK(gluing_bound(3, 4, 0.25) == doctest::Approx(5 * (4 + std::sqrt(2.0))).epsilon(1e-15));
  CHECK_THROWS_AS(gluing_bound(1, 1, 0.0), Error);
  CHECK_THROWS_AS(gluing_bound(1, 1, -0.1), Error);

  CHECK(circle_average(1.0, 1.0).tau0 == cplx(1.0));
  const auto opposite = circle_average(1.0, -1.0);
  CHECK(std::abs(opposite.tau0 - cplx(0, 1)) < 1e-15);
  CHECK(opposite.equidistant);

  const auto generic = circle_average(1.0, cplx(0, 1));
  CHECK(std::abs(generic.tau0 - cplx(1, -1) / std::sqrt(2.0)) < 1e-15);
  CHECK(generic.dist_a == doctest::Approx(std::abs(1.0 - cplx(1, -1) / std::sqrt(2.0))));
  CHECK(generic.dist_b == doctest::Approx(std::abs(cplx(0, 1) - cplx(1, -1) / std::sqrt(2.0))));
  CHECK_FALSE(generic.equidistant);

  const auto mid = circle_average(1.0, cplx(0, 1), true);
  CHECK(std::abs(mid.tau0 - cplx(1, 1) / std::sqrt(2.0)) < 1e-15);
  CHECK(mid.equidistant);
  CHECK(mid.within_half_chord);
  CHECK(std::abs(std::abs(mid.tau0) - 1) < 1e-15);
  CHECK_THROWS_AS(circle_average(2.0, 1.0), Error);
}

TEST_CASE("h1 norm on masks") {
  const auto tf = square_grid(4, 64);
  const auto c = field(tf, [](double, double) { return cplx(0, 3); });
  const auto disk = DomainMask::disk(tf, 0, 0, 1);
  CHECK(h1_norm(c, disk) == doctest::Approx(3 * std::sqrt(disk.area())).epsilon(1e-14));
  // Linear in x: |grad| = 1 everywhere, including one-sided edge differences.
  const auto lin = field(tf, [](double x, double) { return x; });
  const auto all = DomainMask::full(tf);
  double ref = 0.0;
  for (std::size_t a = 0; a < 64; ++a) ref += 64 * (tf.x.point(a) * tf.x.point(a) + 1);
  CHECK(h1_norm(lin, all) == doctest::Approx(std::sqrt(ref * tf.cell_area())).epsilon(1e-12));
  CHECK(h1_norm(lin, disk) <= h1_norm(lin, all));
  CHECK(h1_norm(lin, disk, 1.0) >= h1_norm(lin, disk, 0.0));
}

TEST_CASE("poincare constant") {
  // 128 x 128 nodes with spacing 1/128: a unit square for the graph Laplacian.
  const auto tf = square_grid(2, 256);
  const double h = tf.x.spacing();
  const auto sq = DomainMask::rect(tf, -0.5, 0.5 - h / 2, -0.5, 0.5 - h / 2);
  REQUIRE(sq.count() == 128 * 128);
  const auto rep = poincare_constant(sq, ones(tf));
  CHECK(rep.status == "ok");
  CHECK(rep.connected);
  CHECK(rep.mu1 == doctest::Approx(kPi * kPi).epsilon(0.02));
  // Discrete Neumann eigenvalue of the path graph.
  const double discrete = std::pow(2 / h * std::sin(kPi * h / 2), 2);
  CHECK(rep.mu1 == doctest::Approx(discrete).epsilon(1e-8));
  CHECK(rep.constant == doctest::Approx(1 / std::sqrt(rep.mu1)));

  const auto split = DomainMask::rect(tf, -0.9, -0.1, -0.5, 0.5) | DomainMask::rect(tf, 0.1, 0.9, -0.5, 0.5);
  const auto dis = poincare_constant(split, ones(tf));
  CHECK(dis.status == "disconnected");
  CHECK(std::isinf(dis.constant));
  CHECK(dis.components == 2);

  // Dilation by 2 with the same node count doubles the constant.
  const auto small = square_grid(2, 128);
  const auto big = square_grid(4, 128);
  const double c1 = poincare_constant(DomainMask::disk(small, 0, 0, 0.6), ones(small)).constant;
  const double c2 = poincare_constant(DomainMask::disk(big, 0, 0, 1.2), ones(big)).constant;
  CHECK(c2 / c1 == doctest::Approx(2).epsilon(0.05));

  // Clipping of a vanishing weight is reported.
  auto w = ones(tf);
  w.values[tf.size() / 2 + 64] = 0.0;
  CHECK(poincare_constant(sq, w).clipped == 1);
  CHECK_THROWS_AS(poincare_constant(DomainMask(tf, std::vector<std::uint8_t>(tf.size(), 0)), ones(tf)), Error);
}

TEST_CASE("neck sweep couples poincare and cheeger") {
  const auto tf = TFGrid{make_grid(8, 256), make_grid(4, 128)};
  std::vector<double> poinc, cheeg;
  CheegerOptions opt;
  opt.families = kHalfPlanes;
  opt.directions = 16;
  for (double neck : {1.0, 0.5, 0.25, 0.125}) {
    const auto mask = dumbbell(tf, neck);
    poinc.push_back(poincare_constant(mask, ones(tf)).constant);
    TFField ind(tf);
    for (std::size_t k = 0; k < tf.size(); ++k) ind.values[k] = mask.inside[k] ? 1.0 : 0.0;
    cheeg.push_back(cheeger_estimate(ind, opt).h);
  }
  for (std::size_t i = 1; i < poinc.size(); ++i) {
    CHECK(poinc[i] > poinc[i - 1]);
    CHECK(cheeg[i] < cheeg[i - 1]);
  }
}

TEST_CASE("log-concavity diagnostic") {
  const auto tf = square_grid(4, 64);
  // -log(gamma) = pi |z|^2 has Hessian 2 pi I.
  CHECK(log_concavity_margin(ones(tf), DomainMask::disk(tf, 0, 0, 1)) == doctest::Approx(2 * kPi).epsilon(1e-9));
  // A bimodal weight without the Gaussian factor is not log-concave between its modes.
  const auto two = field(tf, [](double x, double y) {
    return std::exp(-4 * ((x - 1) * (x - 1) + y * y)) + std::exp(-4 * ((x + 1) * (x + 1) + y * y));
  });
  CHECK(log_concavity_margin(two, DomainMask::disk(tf, 0, 0, 1), false) < 0);
}

TEST_CASE("stability certificate") {
  const auto tf = square_grid(8, 128);
  const auto omega = DomainMask::disk(tf, 0, 0, 2);

  const auto same = polynomial(tf, {cplx(0.53, 0.31)});
  const auto self = stability_certificate(same, same, omega);
  CHECK(self.t1 == 0.0);
  CHECK(self.t2 == 0.0);
  CHECK(self.t3 == 0.0);
  CHECK(self.bound == 0.0);
  CHECK(self.distance < 1e-12);

  const auto constant = polynomial(tf, {});
  const auto moved = polynomial(tf, {cplx(0.7, -0.2)}, 0.2);
  FockField f2 = constant;
  for (std::size_t k = 0; k < tf.size(); ++k) f2.values.values[k] += moved.values.values[k];
  const auto flat = stability_certificate(constant, f2, omega);
  CHECK(flat.t3 == 0.0);
  CHECK(flat.holds);

  const std::vector<std::vector<cplx>> roots = {{cplx(0.53, 0.31)}, {cplx(1.03, 0.02), cplx(-0.97, 0.05)}};
  for (const auto& r : roots) {
    const auto f1 = polynomial(tf, r);
    auto extra = r;
    extra.push_back(cplx(0.7, -0.2));
    const auto q = polynomial(tf, extra);
    for (double t : {0.01, 0.3}) {
      FockField g = f1;
      for (std::size_t k = 0; k < tf.size(); ++k) {
        g.values.values[k] = std::polar(1.0, 0.4) * (f1.values.values[k] + t * q.values.values[k]);
      }
      const auto c = stability_certificate(f1, g, omega);
      CAPTURE(t);
      CHECK(c.excised_zeros >= r.size());
      CHECK(c.excised_fraction < 0.05);
      CHECK(c.holds);
      CHECK(c.t3 > 0);
    }
  }
  CertificateOptions p3;
  p3.p = 3;
  CHECK_THROWS_AS(stability_certificate(same, same, omega, p3), Error);
  CHECK_THROWS_AS(stability_certificate(FockField{TFField(tf)}, same, omega), Error);
}
