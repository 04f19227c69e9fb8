#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stftlab/forge.hpp"
#include "test_util.hpp"

using namespace stftlab;

namespace {

constexpr double kPi = std::numbers::pi;

// ||c e^{-pi x^2} chi_{|x| >= a}||_2^2 with c fixed by ||h||_{L^2[-1,1]} = 1.
double gaussian_tail_sq(double a) {
  const double r = std::sqrt(2 * kPi);
  return std::erfc(a * r) / std::erf(r);
}

double riemann_min_norm(const Signal& c, const Signal& b, double p, double sigma) {
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double m = 2.0 * std::min(std::abs(c[k]), std::abs(b[k]));
    const double x = c.grid.point(k);
    acc += std::pow(std::pow(1 + x * x, sigma / 2) * m, p);
  }
  return std::pow(acc * c.grid.spacing(), 1.0 / p);
}

const Grid1D& forge_grid() {
  static const Grid1D g = make_grid(512, 4096);
  return g;
}

}  // namespace

TEST_CASE("annulus schedule against the continuum gaussian tail") {
  const auto& g = forge_grid();
  const auto s = select_annulus_schedule(gaussian(g, 0.7), 0.0, 2.0, 2.0, 5);
  CHECK(s.recentre_shift == doctest::Approx(-0.75));

  // Independent schedule: smallest integer J >= max(2, 2 J_prev + 1) whose
  // continuum tail 2 ||h chi||_2 is below 2^{-3n}.
  std::vector<double> expect;
  double prev = 0.0;
  for (int n = 1; n <= 5; ++n) {
    double j = std::max(2.0, 2 * prev + 1);
    while (2 * std::sqrt(gaussian_tail_sq(j / 2)) > std::ldexp(1.0, -3 * n)) j += 1;
    expect.push_back(j);
    prev = j;
  }
  REQUIRE(s.radii == expect);
  CHECK(expect == std::vector<double>{2, 5, 11, 23, 47});

  // Grid tail sits between the continuum tails from a and a - dx.
  const double dx = g.spacing();
  for (int n = 0; n < 2; ++n) {
    const double a = s.radii[n] / 2;
    CHECK(s.tails[n] >= 2 * std::sqrt(gaussian_tail_sq(a)) * (1 - 1e-6));
    CHECK(s.tails[n] <= 2 * std::sqrt(gaussian_tail_sq(a - dx)) * (1 + 1e-6));
  }
  for (int n = 0; n < 5; ++n) {
    CHECK(s.scales[n] == std::ldexp(1.0, -n - 1));
    CHECK(g.index_of(1.5 * s.radii[n]).has_value());
  }
  const auto bumps = build_bumps(s);
  const double centres[] = {3, 7.5, 16.5, 34.5, 70.5};
  for (int n = 0; n < 5; ++n) {
    std::size_t peak = 0;
    for (std::size_t k = 0; k < g.count(); ++k) {
      if (std::abs(bumps[n][k]) > std::abs(bumps[n][peak])) peak = k;
    }
    CHECK(g.point(peak) == doctest::Approx(centres[n]));
  }
}

TEST_CASE("schedule rejects windows that are too short") {
  const auto g = make_grid(64, 512);
  CHECK_THROWS_WITH_AS(select_annulus_schedule(gaussian(g), 0.0, 2.0, 2.0, 5),
                       doctest::Contains("need L >="), Error);
  CHECK_NOTHROW(select_annulus_schedule(gaussian(g), 0.0, 2.0, 2.0, 2));
  CHECK_THROWS_AS(select_annulus_schedule(Signal(g), 0.0, 2.0, 2.0, 2), Error);
}

TEST_CASE("lemma bounds on gaussian and hermite seeds") {
  const auto& g = forge_grid();
  for (int seed = 0; seed < 2; ++seed) {
    for (double sigma : {0.0, 1.0}) {
      CAPTURE(seed);
      CAPTURE(sigma);
      const Signal h = seed == 0 ? gaussian(g) : hermite(g, 1);
      const auto s = select_annulus_schedule(h, sigma, 2.0, 2.0, 5);
      const auto rows = verify_lemma_bounds(s, build_bumps(s));
      REQUIRE(rows.size() == 5);
      for (const auto& r : rows) {
        CAPTURE(r.n);
        CHECK(std::abs(r.gub_lp - 1) < 1e-10);
        if (sigma == 0.0) CHECK(r.gub_x == doctest::Approx(1).epsilon(1e-12));
        CHECK(r.gub_x <= 1 + 1e-12);
        CHECK(r.mcb >= 1 - 1e-12);
        CHECK(r.mtb <= 8);
        CHECK(r.sob <= 8);
        if (std::isfinite(r.mtb_slope)) CHECK(r.mtb_slope <= -3.5);
        CHECK(r.support_leak < 1e-10);
      }
    }
  }
}

TEST_CASE("pair, ratio and dichotomy") {
  const auto& g = forge_grid();
  const auto s = select_annulus_schedule(gaussian(g), 0.0, 2.0, 2.0, 5);
  const auto bumps = build_bumps(s);
  const double delta = 0.1;

  double prev = 0.0;
  for (int n = 0; n <= 5; ++n) {
    CAPTURE(n);
    const auto pair = assemble_pair(s, bumps, delta, n);
    Signal direct = s.seed;
    for (int j = 1; j <= n; ++j) direct += cplx(delta) * bumps[j - 1];
    CHECK(test::rel_l2(pair.c, direct) < 1e-15);
    CHECK(test::rel_l2(pair.k + pair.kn, cplx(2.0) * pair.c) < 1e-15);

    const auto r = instability_ratio(pair, s);
    // Real c, b: inf_lambda ||k - lambda k_n||_2 = 2 min(||c||, ||b||).
    CHECK(r.numerator == doctest::Approx(2 * std::min(l2_norm(pair.c), l2_norm(pair.b))).epsilon(1e-9));
    if (n == 5) {
      CHECK(r.status == "degenerate");
      continue;
    }
    if (r.status == "finite") {
      // Nonnegative c, b: |c + b| - |c - b| = 2 min(c, b).
      CHECK(r.denominator == doctest::Approx(riemann_min_norm(pair.c, pair.b, 2.0, 0.0)).epsilon(1e-9));
      CHECK(r.ratio >= std::ldexp(1.0, n));
    } else {
      CHECK(r.status == "exact_disjoint");
      CHECK(std::isinf(r.ratio));
    }
    if (n >= 1) CHECK(r.ratio >= 1.8 * prev);
    prev = r.ratio;

    const auto lb = lowerbound_dichotomy(pair, s, bumps);
    CHECK(lb.lambdas == 53);
    CHECK(lb.bound > 0);
    CHECK(lb.holds);

    if (n >= 1) {
      const double rho = disjointness_witness(pair.k, pair.c, pair.b, DistanceNorm::lq(2.0));
      CHECK(rho <= std::ldexp(1.0, -2 * n));
    }
  }
  // Large delta leaves the dichotomy without a positive bound.
  CHECK_FALSE(lowerbound_dichotomy(assemble_pair(s, bumps, 0.5, 2), s, bumps).holds);
  CHECK_THROWS_AS(assemble_pair(s, bumps, 1.0, 2), Error);
  CHECK_THROWS_AS(assemble_pair(s, bumps, 0.1, 6), Error);
}

TEST_CASE("robust modulus difference keeps tiny overlaps") {
  const auto g = make_grid(4, 8);
  Signal c(g), b(g);
  for (std::size_t k = 0; k < 8; ++k) {
    c[k] = std::polar(1.0, 0.3 * k);
    b[k] = std::polar(1e-20, 0.3 * k + 0.5);
  }
  const auto d = modulus_difference(c, b);
  for (std::size_t k = 0; k < 8; ++k) CHECK(d[k].real() == doctest::Approx(2e-20 * std::cos(0.5)).epsilon(1e-12));

  c[0] = 0.0;
  b[0] = 0.0;
  CHECK(modulus_difference(c, b)[0] == cplx(0.0));
}

TEST_CASE("stft family on a reduced grid") {
  const auto g = make_grid(64, 2048);
  const auto tf = stft_grid(g, 16, 128);
  FamilySpec spec;
  spec.ladder = {3, 6, 10};
  const auto fam = stft_instability_family(gaussian(g), WindowSpec::gaussian(), tf, spec);

  // |V(M_a f)| is |V f| shifted by a in omega.
  const auto vf = stft(gaussian(g), WindowSpec::gaussian(), tf);
  const auto vm = stft(modulate(gaussian(g), 3.0), WindowSpec::gaussian(), tf);
  const std::size_t shift = static_cast<std::size_t>(std::lround(3.0 / tf.omega.spacing()));
  double worst = 0.0;
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    for (std::size_t b = shift; b < tf.omega.count(); ++b) {
      worst = std::max(worst, std::abs(std::abs(vm.at(a, b)) - std::abs(vf.at(a, b - shift))));
    }
  }
  CHECK(worst < 1e-12);

  double budget = 0.0;
  for (int n = 0; n < fam.n_max(); ++n) {
    CHECK(fam.weights[n] * fam.bump_norms[n] == doctest::Approx(spec.eps * std::ldexp(1.0, -n - 2)));
    budget += fam.weights[n] * fam.bump_norms[n];
  }
  CHECK(fam.closeness <= budget * (1 + 1e-12));
  CHECK(fam.closeness > 0);
  CHECK(test::rel_l2(fam.f_eps_k(fam.n_max()), fam.f_eps()) < 1e-15);
  CHECK(test::rel_l2(fam.truncated(0), fam.f) < 1e-15);

  for (int k = 0; k < fam.n_max(); ++k) {
    CAPTURE(k);
    const auto row = evaluate_family_member(fam, k, {2, 4});
    CHECK(row.ratio > std::ldexp(1.0, k));
    for (const auto& c : row.lp) {
      CHECK(c.constant <= c.bound);
      CHECK(c.bound <= 2.5);
    }
  }

  FamilySpec bad = spec;
  bad.ladder = {3, 3.001};
  CHECK_THROWS_AS(stft_instability_family(gaussian(g), WindowSpec::gaussian(), tf, bad), Error);
  bad.ladder = {3, 14};
  CHECK_THROWS_WITH_AS(stft_instability_family(gaussian(g), WindowSpec::gaussian(), tf, bad),
                       doctest::Contains("omega grid"), Error);
}
