#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "stftlab/transforms.hpp"
#include "test_util.hpp"

using namespace stftlab;
using stftlab::test::random_smooth;
using stftlab::test::rel_l2;

namespace {

constexpr double kPi = std::numbers::pi;

const Grid1D kGrid = make_grid(16, 256);

double phase_aligned_error(const Signal& f, const Signal& g) {
  const double nf = l2_norm(f), ng = l2_norm(g);
  return std::sqrt(std::max(0.0, nf * nf + ng * ng - 2.0 * std::abs(inner(f, g)))) / nf;
}

}  // namespace

TEST_CASE("stft agrees with the defining integral") {
  const auto g = make_grid(8, 64);
  SplitMix64 rng(2);
  const auto f = random_smooth(g, rng, 2);
  const auto phi = gaussian(g);
  const TFGrid tf = full_stft_grid(g);
  const auto v = stft(f, WindowSpec::gaussian(), tf);
  double worst = 0.0;
  for (std::size_t a = 0; a < 64; a += 5) {
    for (std::size_t b = 0; b < 64; b += 3) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < 64; ++k) {
        const std::size_t shifted = (k + 64 + 32 - a) % 64;  // t_k - x_a on the periodic grid
        acc += f[k] * std::conj(phi[shifted]) * std::polar(1.0, -2 * kPi * g.point(k) * tf.omega.point(b));
      }
      worst = std::max(worst, std::abs(acc * g.spacing() - v.at(a, b)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("stft of the gaussian") {
  const TFGrid tf = full_stft_grid(kGrid);
  const auto v = stft(gaussian(kGrid), WindowSpec::gaussian(), tf);
  double worst = 0.0;
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    for (std::size_t b = 0; b < tf.omega.count(); ++b) {
      const double x = tf.x.point(a), w = tf.omega.point(b);
      const cplx ref = std::polar(std::exp(-kPi * (x * x + w * w) / 2), -kPi * x * w);
      worst = std::max(worst, std::abs(v.at(a, b) - ref));
    }
  }
  CHECK(worst < 1e-10);
  CHECK(sup_norm(stft(Signal(kGrid), WindowSpec::gaussian(), tf).values) == 0.0);
}

TEST_CASE("stft isometry") {
  SplitMix64 rng(21);
  const TFGrid tf = full_stft_grid(kGrid);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_smooth(kGrid, rng);
    REQUIRE(boundary_mass_fraction(f) < 1e-10);
    for (const auto& w : {WindowSpec::gaussian(), WindowSpec::hermite(1), WindowSpec::hermite(3)}) {
      const double ratio = l2_norm(stft(f, w, tf)) / l2_norm(f);
      CHECK(std::abs(ratio - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("sub-window stft grid") {
  const auto g = make_grid(32, 1024);
  const TFGrid tf = stft_grid(g, 8, 64);
  const auto v = stft(gaussian(g), WindowSpec::gaussian(), tf);
  CHECK(v.nx() == 64);
  CHECK(v.nw() == 1024);
  const auto full = stft(gaussian(g), WindowSpec::gaussian(), full_stft_grid(g));
  // x = 0 column is index 32 on the sub-grid and 512 on the full grid.
  for (std::size_t b = 0; b < 1024; ++b) CHECK(v.at(32, b) == full.at(512, b));
  CHECK_THROWS_AS(stft_grid(g, 64, 64), Error);
  CHECK_THROWS_AS(stft_grid(g, 8, 512), Error);
  const TFGrid wrong{g, make_grid(16, 1024)};
  CHECK_THROWS_AS(stft(gaussian(g), WindowSpec::gaussian(), wrong), Error);
}

TEST_CASE("covariance on a lattice of shifts") {
  SplitMix64 rng(4);
  const auto f = random_smooth(kGrid, rng);
  const TFGrid tf = full_stft_grid(kGrid);
  CHECK(covariance_residual(f, WindowSpec::gaussian(), tf, 0, 0) == 0.0);
  const double scale = sup_norm(stft(f, WindowSpec::gaussian(), tf).values);
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) {
      const double r = covariance_residual(f, WindowSpec::gaussian(), tf, i * 1.0, j * 3.0 / 16);
      CHECK(r <= 1e-8 * scale);
    }
  }
  const auto g0 = gaussian(kGrid);
  CHECK(covariance_residual(g0, WindowSpec::gaussian(), tf, 2.0, 0.0) < 1e-8);
  CHECK(covariance_residual(g0, WindowSpec::gaussian(), tf, 0.0, 3.0 / 16) < 1e-8);
  CHECK_THROWS_AS(covariance_residual(g0, WindowSpec::gaussian(), tf, 0.01, 0.0), Error);
}

TEST_CASE("ambiguity function") {
  const auto g0 = gaussian(kGrid);
  const auto a = ambiguity(g0);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.nx(); ++i) {
    for (std::size_t j = 0; j < a.nw(); ++j) {
      const double x = a.grid.x.point(i), w = a.grid.omega.point(j);
      worst = std::max(worst, std::abs(a.at(i, j) - std::exp(-kPi * (x * x + w * w) / 2)));
    }
  }
  CHECK(worst < 1e-4);

  SplitMix64 rng(8);
  const auto f = random_smooth(kGrid, rng);
  const auto af = ambiguity(f);
  const double n2 = l2_norm(f) * l2_norm(f);
  CHECK(std::abs(af.at(128, 128) - n2) < 1e-6 * n2);
  for (const auto& v : af.values) CHECK(std::abs(v) <= std::abs(af.at(128, 128)) * (1 + 1e-12));
  CHECK(sup_norm(ambiguity(Signal(kGrid)).values) == 0.0);
}

TEST_CASE("phaseless measurement") {
  SplitMix64 rng(9);
  const auto f = random_smooth(kGrid, rng);
  const TFGrid tf = full_stft_grid(kGrid);
  const auto m = phaseless(f, WindowSpec::gaussian(), tf);
  for (const auto& v : m.values) {
    CHECK(v.imag() == 0.0);
    CHECK(v.real() >= 0.0);
  }
  const auto rotated = phaseless(std::polar(1.0, 0.7) * f, WindowSpec::gaussian(), tf);
  double worst = 0.0;
  for (std::size_t k = 0; k < m.values.size(); ++k) worst = std::max(worst, std::abs(rotated.values[k] - m.values[k]));
  CHECK(worst <= 1e-13 * sup_norm(m.values));
  double total = 0.0;
  for (const auto& v : m.values) total += v.real();
  total *= tf.cell_area();
  const double n2 = l2_norm(f) * l2_norm(f);
  CHECK(std::abs(total - n2) < 1e-4 * n2);
}

TEST_CASE("ambiguity relation") {
  CHECK(ambiguity_relation_residual(gaussian(kGrid), WindowSpec::gaussian()) < 1e-3);
  CHECK(ambiguity_relation_residual(hermite(kGrid, 1), WindowSpec::gaussian()) < 1e-3);
  for (int n = 0; n <= 4; ++n) CHECK(ambiguity_relation_residual(hermite(kGrid, n), WindowSpec::gaussian()) < 1e-3);
  SplitMix64 rng(10);
  for (int t = 0; t < 3; ++t) {
    CHECK(ambiguity_relation_residual(random_smooth(kGrid, rng), WindowSpec::gaussian()) < 1e-3);
    CHECK(ambiguity_relation_residual(random_smooth(kGrid, rng), WindowSpec::hermite(2)) < 1e-3);
  }
  CHECK(ambiguity_relation_residual(Signal(kGrid), WindowSpec::gaussian()) == 0.0);
  CHECK_THROWS_AS(ambiguity_relation_residual(gaussian(make_grid(32, 256)), WindowSpec::gaussian()), Error);
}

TEST_CASE("fock view of hermite functions") {
  const TFGrid tf = full_stft_grid(kGrid);
  const auto gauss = to_fock(stft(gaussian(kGrid), WindowSpec::gaussian(), tf), WindowSpec::gaussian());
  const auto region = fock_region(tf, 2.0, 0);
  double lo = 1e300, hi = 0.0;
  for (std::size_t k = 0; k < region.size(); ++k) {
    if (!region[k]) continue;
    lo = std::min(lo, std::abs(gauss.values.values[k]));
    hi = std::max(hi, std::abs(gauss.values.values[k]));
  }
  CHECK((hi - lo) / hi < 1e-4);
  CHECK(monomial_fit_residual(gauss, 0) < 1e-4);
  for (int n = 0; n <= 4; ++n) {
    const auto fock = to_fock(stft(hermite(kGrid, n), WindowSpec::gaussian(), tf), WindowSpec::gaussian());
    CHECK(monomial_fit_residual(fock, n) < 1e-3);
    CHECK(cauchy_riemann_residual(fock) < 1e-2);
    CHECK(key_identity_residual(fock) < 5e-2);
  }
  CHECK_THROWS_AS(to_fock(stft(gaussian(kGrid), WindowSpec::hermite(1), tf), WindowSpec::hermite(1)), Error);
}

TEST_CASE("fock round trip and key identity on random signals") {
  const auto grid = make_grid(32, 1024);
  const TFGrid tf = full_stft_grid(grid);
  SplitMix64 rng(12);
  for (int t = 0; t < 3; ++t) {
    const auto f = random_smooth(grid, rng, 4, 1.0);
    const auto v = stft(f, WindowSpec::gaussian(), tf);
    const auto fock = to_fock(v, WindowSpec::gaussian());
    const auto back = from_fock(fock);
    double worst = 0.0;
    // e^{pi |z|^2 / 2} overflows far out; compare on |z| <= 8.
    const auto inner_disk = fock_region(tf, 8.0, 0);
    for (std::size_t k = 0; k < v.values.size(); ++k) {
      if (inner_disk[k]) worst = std::max(worst, std::abs(back.values[k] - v.values[k]));
    }
    CHECK(worst < 1e-12 * sup_norm(v.values));
    CHECK(cauchy_riemann_residual(fock) < 1e-2);
    CHECK(key_identity_residual(fock) < 5e-2);
    CHECK(modulus_gradient_excess(v) < 1e-12);
  }
  TFField noise(tf);
  for (auto& c : noise.values) c = {rng.normal(), rng.normal()};
  CHECK(modulus_gradient_excess(noise) < 1e-12);
}

TEST_CASE("polynomial fock fields") {
  const TFGrid tf = full_stft_grid(kGrid);
  const auto one = fock_polynomial_field({}, tf);
  for (const auto& v : one.fock.values.values) CHECK(v == cplx(1.0));
  const auto mono = fock_polynomial_field({0.0}, tf);
  std::size_t vanishing = 0;
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    for (std::size_t b = 0; b < tf.omega.count(); ++b) {
      if (mono.fock.values.at(a, b) == 0.0) {
        ++vanishing;
        CHECK(a == 128);
        CHECK(b == 128);
      }
    }
  }
  CHECK(vanishing == 1);
  const std::vector<cplx> roots{{0.5, 0.25}, {-1.0, 0.5}, {0.25, -1.5}};
  const auto p = fock_polynomial_field(roots, tf);
  CHECK(cauchy_riemann_residual(p.fock) < 1e-2);
  CHECK(key_identity_residual(p.fock) < 5e-2);
  CHECK(log_derivative_bound_ratio(roots, tf, 2.0) <= 1.0);
  CHECK(log_derivative_bound_ratio(roots, tf, -8.0) <= 1.0);
  CHECK(find_zero_cells(p.fock.values).size() >= 3);
  CHECK_THROWS_AS(fock_polynomial_field({{20.0, 0.0}}, tf), Error);
  const TFGrid small = full_stft_grid(make_grid(4, 16));
  CHECK_THROWS_AS(fock_polynomial_field({1.0}, small), Error);
}

TEST_CASE("recovery from phaseless measurements") {
  const TFGrid tf = self_dual_grid(kGrid);
  const auto g0 = gaussian(kGrid);
  const auto r0 = recover(phaseless(g0, WindowSpec::gaussian(), tf), kGrid, WindowSpec::gaussian(), 1e-6);
  CHECK(phase_aligned_error(g0, r0.signal) < 1e-3);
  CHECK(r0.masked_fraction >= 0.0);
  CHECK(r0.masked_fraction < 1.0);

  const auto h2 = hermite(kGrid, 2);
  const auto r2 = recover(phaseless(h2, WindowSpec::gaussian(), tf), kGrid, WindowSpec::gaussian());
  CHECK(phase_aligned_error(h2, r2.signal) < 1e-2);

  const auto h1 = std::polar(1.0, 2.0) * hermite(kGrid, 1);
  const auto r1 = recover(phaseless(h1, WindowSpec::gaussian(), tf), kGrid, WindowSpec::gaussian());
  CHECK(phase_aligned_error(h1, r1.signal) < 1e-2);

  // Widely spread signals lose ambiguity mass to the mask.
  SplitMix64 rng(13);
  const auto f = random_smooth(kGrid, rng);
  const auto m = phaseless(f, WindowSpec::gaussian(), tf);
  const auto loose = recover(m, kGrid, WindowSpec::gaussian(), 1e-12);
  const auto tight = recover(m, kGrid, WindowSpec::gaussian(), 1e-3);
  CHECK(tight.masked_fraction > loose.masked_fraction);
  CHECK(phase_aligned_error(f, loose.signal) < phase_aligned_error(f, tight.signal));

  CHECK_THROWS_WITH_AS(recover(TFField(tf), kGrid, WindowSpec::gaussian()), "zero measurement", Error);
  CHECK_THROWS_AS(recover(phaseless(g0, WindowSpec::gaussian(), tf), kGrid, WindowSpec::gaussian(), 5.0), Error);
}

TEST_CASE("hermite ambiguity closed form") {
  const auto t_of = [](double x, double w) { return kPi * (x * x + w * w); };
  const std::vector<std::function<double(double)>> laguerre{
      [](double) { return 1.0; }, [](double t) { return 1.0 - t; },
      [](double t) { return 1.0 - 2.0 * t + t * t / 2.0; }};
  for (int n = 0; n <= 2; ++n) {
    const auto a = ambiguity(hermite(kGrid, n));
    double worst = 0.0;
    for (std::size_t i = 0; i < 256; i += 3) {
      for (std::size_t j = 0; j < 256; j += 3) {
        const double x = a.grid.x.point(i), w = a.grid.omega.point(j);
        const double ref = laguerre[n](t_of(x, w)) * std::exp(-t_of(x, w) / 2);
        worst = std::max(worst, std::abs(a.at(i, j) - ref));
        CHECK(std::abs(hermite_ambiguity(n, x, w) - ref) < 1e-14);
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("window comparison ratio") {
  const auto same = window_comparison_ratio(WindowSpec::gaussian(), WindowSpec::gaussian(), kGrid);
  CHECK(same.zeros.empty());
  double worst = 0.0;
  for (std::size_t a = 0; a < 256; ++a) {
    for (std::size_t b = 0; b < 256; ++b) {
      const double x = same.ratio.grid.x.point(a), w = same.ratio.grid.omega.point(b);
      worst = std::max(worst, std::abs(same.ratio.at(a, b).real() - std::sqrt(1 + x * x + w * w)));
    }
  }
  CHECK(worst < 1e-9);
  CHECK(same.sup == doctest::Approx(std::sqrt(1 + 64 + 64)).epsilon(1e-9));

  const auto h1 = window_comparison_ratio(WindowSpec::gaussian(), WindowSpec::hermite(1), kGrid);
  CHECK(std::isinf(h1.sup));
  REQUIRE(!h1.zeros.empty());
  // A hermite(1) = (1 - pi r^2) exp(-pi r^2 / 2): zero circle at r = 1/sqrt(pi).
  for (const auto& [x, w] : h1.zeros) CHECK(std::abs(std::hypot(x, w) - 1 / std::sqrt(kPi)) < 0.02);
  CHECK(std::isfinite(h1.ratio.at(128, 128).real()));
}

TEST_CASE("window comparison ratio with sampled windows") {
  const auto sampled = WindowSpec::sampled(hermite(kGrid, 1));
  const auto r = window_comparison_ratio(WindowSpec::gaussian(), sampled, kGrid);
  CHECK(std::isinf(r.sup));
  CHECK(r.unresolved > 0);
  std::size_t near_circle = 0;
  for (const auto& [x, w] : r.zeros) near_circle += std::abs(std::hypot(x, w) - 1 / std::sqrt(kPi)) < 0.02;
  CHECK(near_circle > 0);
  const auto self = window_comparison_ratio(WindowSpec::sampled(gaussian(kGrid)), WindowSpec::sampled(gaussian(kGrid)), kGrid);
  CHECK(self.zeros.empty());
  CHECK(std::isfinite(self.sup));
  CHECK_THROWS_AS(WindowSpec::sampled(2.0 * gaussian(kGrid)), Error);
}
