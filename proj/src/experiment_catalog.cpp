#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "experiment_context.hpp"
#include "stftlab/forge.hpp"
#include "stftlab/geometry.hpp"
#include "stftlab/norms.hpp"
#include "stftlab/rng.hpp"
#include "stftlab/transforms.hpp"

namespace stftlab::experiments {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double aligned_error(const Signal& f, const Signal& g) {
  const double nf = l2_norm(f), ng = l2_norm(g);
  return std::sqrt(std::max(0.0, nf * nf + ng * ng - 2.0 * std::abs(inner(f, g)))) / nf;
}

WindowSpec window_named(const std::string& name) {
  if (name == "gaussian") return WindowSpec::gaussian();
  if (name.rfind("hermite", 0) == 0) return WindowSpec::hermite(std::stoi(name.substr(7)));
  throw Error("unknown window " + name);
}

TFGrid square(double length, std::size_t n) { return {make_grid(length, n), make_grid(length, n)}; }

template <typename Fn>
TFField sample(const TFGrid& tf, Fn&& fn) {
  TFField out(tf);
  for (std::size_t a = 0; a < tf.x.count(); ++a) {
    for (std::size_t b = 0; b < tf.omega.count(); ++b) out.at(a, b) = fn(tf.x.point(a), tf.omega.point(b));
  }
  return out;
}

std::string in_window(int n, int lo, int hi) { return n >= lo && n <= hi ? "in" : "out"; }

// ---------------------------------------------------------------------------

void isometry_sweep(Context& c) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  const TFGrid tf = full_stft_grid(g);
  const std::vector<WindowSpec> windows{WindowSpec::gaussian(), WindowSpec::hermite(1), WindowSpec::hermite(3)};
  Table t{"isometry", {"fixture", "window", "norm_f", "norm_window", "norm_v", "deviation"}, {}};
  const int n = c.integer("fixtures");
  for (int i = 0; i < n; ++i) {
    std::string name;
    Signal f;
    if (i < 4) {
      name = "hermite" + std::to_string(i);
      f = hermite(g, i);
    } else {
      name = "random" + std::to_string(c.seed + i);
      f = random_smooth(g, c.seed + i);
    }
    const auto& w = windows[i % windows.size()];
    const double nf = l2_norm(f), nw = l2_norm(w.on(g)), nv = l2_norm(stft(f, w, tf));
    t.add({name, w.name(), cell(nf), cell(nw), cell(nv), cell(std::abs(nv / (nf * nw) - 1.0))});
  }
  c.add(std::move(t));
  c.check({.id = "isometry", .invariant = "tf_transforms.isometry", .table = "isometry", .kind = "le",
           .column = "deviation", .value = c.num("tolerance")});
}

void covariance_lattice(Context& c) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  const TFGrid tf = full_stft_grid(g);
  const int half = c.integer("lattice") / 2;
  const double du = c.num("u_step"), deta = c.num("eta_step");
  const std::vector<std::pair<std::string, Signal>> fixtures{
      {"random" + std::to_string(c.seed), random_smooth(g, c.seed)},
      {"gaussian-shifted", gaussian(g, 1.0, 0.5)}};
  Table t{"covariance", {"fixture", "window", "u", "eta", "residual"}, {}};
  for (const auto& [name, f] : fixtures) {
    for (const std::string wname : {"gaussian", "hermite2"}) {
      const auto w = window_named(wname);
      const double scale = sup_norm(stft(f, w, tf).values);
      for (int i = -half; i <= half; ++i) {
        for (int j = -half; j <= half; ++j) {
          const double r = covariance_residual(f, w, tf, i * du, j * deta) / scale;
          t.add({name, wname, cell(i * du), cell(j * deta), cell(r)});
        }
      }
    }
  }
  c.add(std::move(t));
  c.check({.id = "covariance", .invariant = "tf_transforms.covariance", .table = "covariance", .kind = "le",
           .column = "residual", .value = c.num("tolerance")});
}

void ambiguity_relation(Context& c) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  Table t{"ambiguity", {"fixture", "window", "residual"}, {}};
  const std::vector<std::pair<std::string, Signal>> fixtures{
      {"gaussian", gaussian(g)}, {"hermite1", hermite(g, 1)}, {"hermite2", hermite(g, 2)},
      {"gaussian-shifted", gaussian(g, 1.0, 0.5)}};
  for (const auto& [name, f] : fixtures) {
    for (const std::string wname : {"gaussian", "hermite1"}) {
      t.add({name, wname, cell(ambiguity_relation_residual(f, window_named(wname)))});
    }
  }
  c.add(std::move(t));
  c.check({.id = "ambiguity-relation", .invariant = "tf_transforms.ambiguity_relation", .table = "ambiguity",
           .kind = "le", .column = "residual", .value = c.num("tolerance")});
}

void recovery(Context& c, bool noisy) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  const TFGrid tf = self_dual_grid(g);
  const auto window = WindowSpec::gaussian();
  const double phi2 = std::pow(l2_norm(window.on(g)), 2);  // A phi(0, 0)
  std::vector<std::pair<std::string, double>> taus{{"default", c.num("tau_factor")}};
  if (noisy) {
    for (double t : c.list("tau_sweep")) taus.emplace_back("sweep", t);
  }
  const int trials = noisy ? c.integer("trials") : 1;
  SplitMix64 rng(c.seed);
  Table t{noisy ? "recover_noisy" : "recover",
          {"fixture", "trial", "snr_db", "setting", "tau", "masked_fraction", "error"}, {}};
  for (const std::string name : {"gaussian", "hermite1", "hermite2"}) {
    const auto f = fixture(name, g);
    const auto clean = phaseless(f, window, tf);
    for (int trial = 0; trial < trials; ++trial) {
      TFField m = clean;
      double snr = kInf;
      if (noisy) {
        snr = c.num("snr_db");
        double ms = 0.0;
        for (const auto& v : clean.values) ms += v.real() * v.real();
        const double sigma = std::sqrt(ms / static_cast<double>(clean.values.size())) * std::pow(10.0, -snr / 20.0);
        for (auto& v : m.values) v = std::max(0.0, v.real() + sigma * rng.normal());
      }
      for (const auto& [setting, factor] : taus) {
        const auto r = recover(m, g, window, factor * phi2);
        t.add({name, cell(trial), cell(snr), setting, cell(factor * phi2), cell(r.masked_fraction),
               cell(aligned_error(f, r.signal))});
      }
    }
  }
  const std::string table = t.name;
  c.add(std::move(t));
  c.check({.id = noisy ? "recover-noisy" : "recover-noiseless", .invariant = "tf_transforms.recovery",
           .table = table, .kind = "le", .column = "error", .value = c.num("tolerance"), .where_column = "setting",
           .where_value = "default", .gate = !noisy});
}

void recover_noiseless(Context& c) { recovery(c, false); }
void recover_noisy(Context& c) { recovery(c, true); }

// ---------------------------------------------------------------------------

struct Forge {
  AnnulusSchedule schedule;
  std::vector<Signal> bumps;
};

Forge gaussian_forge(Context& c, const std::string& seed_name = "gaussian", double sigma = -1.0) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  Forge out;
  out.schedule = select_annulus_schedule(fixture(seed_name, g), sigma < 0 ? c.num("sigma") : sigma, c.num("p"),
                                         c.num("q"), c.integer("n_max"));
  out.bumps = build_bumps(out.schedule);
  return out;
}

void prop21_ratio(Context& c) {
  const auto forge = gaussian_forge(c);
  const auto win = c.ints("window");
  const int lo = win.at(0), hi = win.at(1);
  const double delta = c.num("delta");
  const int n_max = forge.schedule.n_max();

  Table t{"ratios", {"n", "j", "numerator", "denominator", "ratio", "target", "growth", "status", "window", "growth_window"}, {}};
  Table d{"dichotomy", {"n", "min_measured", "bound", "lambdas", "holds", "window"}, {}};
  std::vector<double> ratios(n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n) {
    const auto pair = assemble_pair(forge.schedule, forge.bumps, delta, n);
    const auto r = instability_ratio(pair, forge.schedule);
    ratios[n] = r.ratio;
    const double growth = n > 1 ? r.ratio / ratios[n - 1] : std::numeric_limits<double>::quiet_NaN();
    t.add({cell(n), cell(forge.schedule.radii[n - 1]), cell(r.numerator), cell(r.denominator), cell(r.ratio),
           cell(pair.target), cell(growth), r.status, in_window(n, lo, hi), in_window(n, lo + 1, hi)});
    const auto lb = lowerbound_dichotomy(pair, forge.schedule, forge.bumps);
    d.add({cell(n), cell(lb.min_measured), cell(lb.bound), cell(lb.lambdas), cell(lb.holds), in_window(n, lo, hi)});
  }

  // Smallest n0 with every check passing on [n0, hi].
  const double need = c.num("growth");
  int n0 = hi + 1;
  for (int n = hi; n >= 1; --n) {
    if (!(ratios[n] >= std::ldexp(1.0, n))) break;
    if (n < hi && !(ratios[n + 1] / ratios[n] >= need)) break;
    n0 = n;
  }

  Table s{"delta_sweep", {"delta", "n", "ratio", "target", "pass"}, {}};
  double largest = 0.0;
  for (double dl : c.list("deltas")) {
    bool all = true;
    for (int n = lo; n <= hi; ++n) {
      const auto r = instability_ratio(assemble_pair(forge.schedule, forge.bumps, dl, n), forge.schedule);
      const bool pass = r.ratio >= std::ldexp(1.0, n);
      all = all && pass;
      s.add({cell(dl), cell(n), cell(r.ratio), cell(std::ldexp(1.0, n)), cell(pass)});
    }
    if (all) largest = std::max(largest, dl);
  }

  c.summary()["radii"] = forge.schedule.radii;
  c.summary()["normalization"] = forge.schedule.normalization;
  c.summary()["pinned_window"] = win;
  c.summary()["measured_window_start"] = n0;
  c.summary()["largest_passing_delta"] = largest;
  c.add(std::move(t));
  c.add(std::move(d));
  c.add(std::move(s));
  c.check({.id = "ratio-exceeds-2^n", .invariant = "instability_forge.ratio_lower_bound", .table = "ratios",
           .kind = "ge", .column = "ratio", .other = "target", .where_column = "window", .where_value = "in"});
  c.check({.id = "ratio-growth", .invariant = "instability_forge.ratio_growth", .table = "ratios", .kind = "ge",
           .column = "growth", .value = need, .where_column = "growth_window", .where_value = "in"});
  c.check({.id = "dichotomy", .invariant = "instability_forge.lowerbound_dichotomy", .table = "dichotomy",
           .kind = "true", .column = "holds", .where_column = "window", .where_value = "in"});
}

void lemma22_bounds(Context& c) {
  Table t{"bounds", {"seed", "sigma", "n", "j", "gub_x", "gub_lp", "gub_lp_error", "mcb", "mtb", "sob", "mtb_slope",
                     "support_leak"}, {}};
  const auto seeds = c.params.at("seeds").get<std::vector<std::string>>();
  for (const auto& seed : seeds) {
    for (double sigma : c.list("sigmas")) {
      const auto forge = gaussian_forge(c, seed, sigma);
      for (const auto& r : verify_lemma_bounds(forge.schedule, forge.bumps)) {
        t.add({seed, cell(sigma), cell(r.n), cell(r.j), cell(r.gub_x), cell(r.gub_lp), cell(std::abs(r.gub_lp - 1.0)),
               cell(r.mcb), cell(r.mtb), cell(r.sob), cell(r.mtb_slope), cell(r.support_leak)});
      }
    }
  }
  c.add(std::move(t));
  const double k = c.num("implicit_constant");
  c.check({.id = "gub-lp-equality", .invariant = "instability_forge.gub", .table = "bounds", .kind = "le",
           .column = "gub_lp_error", .value = c.num("gub_tolerance")});
  c.check({.id = "mcb", .invariant = "instability_forge.mcb", .table = "bounds", .kind = "ge", .column = "mcb",
           .value = 1.0 - 1e-12});
  c.check({.id = "mtb", .invariant = "instability_forge.mtb", .table = "bounds", .kind = "le", .column = "mtb",
           .value = k});
  c.check({.id = "sob", .invariant = "instability_forge.sob", .table = "bounds", .kind = "le", .column = "sob",
           .value = k});
  c.check({.id = "mtb-slope", .invariant = "instability_forge.mtb", .table = "bounds", .kind = "le",
           .column = "mtb_slope", .value = c.num("slope"), .skip_nonfinite = true});
  c.check({.id = "support", .invariant = "instability_forge.disjoint_annuli", .table = "bounds", .kind = "le",
           .column = "support_leak", .value = 1e-10});
}

// ---------------------------------------------------------------------------

StftFamily family_from(Context& c, const Signal* seed = nullptr) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  const TFGrid tf = stft_grid(g, c.num("x_extent"), c.count("x_count"));
  FamilySpec spec;
  spec.s = c.num("s");
  spec.p = c.num("p");
  spec.r = c.num("r");
  spec.q = c.num("q");
  spec.eps = c.num("eps");
  spec.smoothness_gap = c.num("smoothness_gap");
  spec.ladder = c.list("ladder");
  return stft_instability_family(seed ? *seed : gaussian(g), WindowSpec::gaussian(), tf, spec);
}

void add_family_table(Context& c, const StftFamily& fam) {
  Table t{"family", {"n", "a", "weight", "bump_norm"}, {}};
  for (int n = 0; n < fam.n_max(); ++n) {
    t.add({cell(n + 1), cell(fam.spec.ladder[n]), cell(fam.weights[n]), cell(fam.bump_norms[n])});
  }
  c.add(std::move(t));
}

void thm15_ratio(Context& c) {
  const auto fam = family_from(c);
  const auto win = c.ints("window");
  Table t{"ratios", {"k", "numerator", "denominator", "ratio", "target", "window"}, {}};
  for (int k = 0; k < fam.n_max(); ++k) {
    const auto row = evaluate_family_member(fam, k, {});
    t.add({cell(k), cell(row.numerator), cell(row.denominator), cell(row.ratio), cell(std::ldexp(1.0, k)),
           in_window(k, win.at(0), win.at(1))});
  }
  Table cl{"closeness", {"closeness", "eps", "base_norm_2r"}, {}};
  cl.add({cell(fam.closeness), cell(fam.spec.eps), cell(fam.base_norm_2r)});
  add_family_table(c, fam);
  c.add(std::move(t));
  c.add(std::move(cl));
  c.check({.id = "ratio-exceeds-2^k", .invariant = "instability_forge.stft_family_ratio", .table = "ratios",
           .kind = "ge", .column = "ratio", .other = "target", .where_column = "window", .where_value = "in"});
  c.check({.id = "closeness", .invariant = "instability_forge.stft_family_closeness", .table = "closeness",
           .kind = "le", .column = "closeness", .other = "eps"});
}

void lp_reduction(Context& c) {
  const auto fam = family_from(c);
  const double pinned = c.num("pinned_constant");
  Table t{"lp", {"k", "j", "lhs", "low", "high", "constant", "bound", "pinned"}, {}};
  for (int k : c.ints("members")) {
    const auto row = evaluate_family_member(fam, k, c.ints("scales"), c.num("lp_delta"));
    for (const auto& lp : row.lp) {
      t.add({cell(k), cell(lp.j), cell(lp.lhs), cell(lp.low), cell(lp.high), cell(lp.constant), cell(lp.bound),
             cell(pinned)});
    }
  }
  c.add(std::move(t));
  c.check({.id = "lp-constant", .invariant = "norms.littlewood_paley_reduction", .table = "lp", .kind = "le",
           .column = "constant", .other = "pinned"});
  c.check({.id = "lp-analytic-bound", .invariant = "norms.littlewood_paley_reduction", .table = "lp", .kind = "le",
           .column = "bound", .other = "pinned"});
}

// ---------------------------------------------------------------------------

void cheeger_gaussian(Context& c) {
  const std::size_t n = c.count("N");
  Table t{"cheeger", {"N", "h", "family", "total_mass", "half_plane_value"}, {}};
  std::vector<double> hs;
  for (std::size_t m : {n, 2 * n}) {
    const auto g = make_grid(c.num("L"), m);
    const auto tf = stft_grid(g, c.num("L"), m);
    const auto rep = cheeger_estimate(modulus(stft(gaussian(g), WindowSpec::gaussian(), tf)));
    hs.push_back(rep.h);
    t.add({cell(m), cell(rep.h), rep.family, cell(rep.total_mass), cell(std::sqrt(2.0))});
  }
  Table r{"refinement", {"h_coarse", "h_fine", "relative_change"}, {}};
  r.add({cell(hs[0]), cell(hs[1]), cell(std::abs(hs[1] / hs[0] - 1.0))});
  c.add(std::move(t));
  c.add(std::move(r));
  c.check({.id = "finite-positive", .invariant = "geometry_constants.cheeger_upper_bound", .table = "cheeger",
           .kind = "ge", .column = "h", .value = 1e-12});
  c.check({.id = "finite", .invariant = "geometry_constants.cheeger_upper_bound", .table = "cheeger", .kind = "le",
           .column = "h", .value = 1e300});
  c.check({.id = "refinement-stable", .invariant = "geometry_constants.cheeger_refinement", .table = "refinement",
           .kind = "le", .column = "relative_change", .value = c.num("tolerance")});
}

void cheeger_trend(Context& c) {
  const auto fam = family_from(c);
  Table t{"trend", {"bumps", "h", "family", "total_mass"}, {}};
  std::vector<double> hs;
  for (int n = 0; n <= std::min(c.integer("bumps"), fam.n_max()); ++n) {
    const auto rep = cheeger_estimate(modulus(stft(fam.truncated(n), fam.window, fam.tf)));
    hs.push_back(rep.h);
    t.add({cell(n), cell(rep.h), rep.family, cell(rep.total_mass)});
  }
  Table d{"drop", {"h_first", "h_last", "drop"}, {}};
  d.add({cell(hs.front()), cell(hs.back()), cell(hs.front() / hs.back())});
  add_family_table(c, fam);
  c.add(std::move(t));
  c.add(std::move(d));
  c.check({.id = "non-increasing", .invariant = "geometry_constants.cheeger_trend", .table = "trend",
           .kind = "nonincreasing", .column = "h"});
  c.check({.id = "drop", .invariant = "geometry_constants.cheeger_trend", .table = "drop", .kind = "ge",
           .column = "drop", .value = c.num("drop")});
}

// ---------------------------------------------------------------------------

struct Triple {
  std::string fixture;
  std::string layout;
  DomainMask omega, a, b;
};

std::vector<Triple> gluing_triples(const TFGrid& tf) {
  const auto disk = DomainMask::disk(tf, 0, 0, 2.5);
  const auto box = DomainMask::rect(tf, -3, 3, -2, 2);
  auto split = [&](const DomainMask& om, double angle, double overlap) {
    return std::pair{om & DomainMask::half_plane(tf, angle, -overlap / 2),
                     om & DomainMask::half_plane(tf, angle + kPi, -overlap / 2)};
  };
  std::vector<Triple> out;
  for (const std::string f : {"gaussian", "hermite1", "two-bumps", "echo", "random"}) {
    const auto [a1, b1] = split(disk, 0.0, 1.0);
    out.push_back({f, "disk-x", disk, a1, b1});
    const auto [a2, b2] = split(box, kPi / 3, 0.5);
    out.push_back({f, "box-tilted", box, a2, b2});
  }
  return out;
}

void connectivity_gluing(Context& c) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  const auto tf = stft_grid(g, c.num("x_extent"), c.count("x_count"));
  const auto window = WindowSpec::gaussian();
  const double r = c.num("r");

  auto make = [&](const std::string& name) {
    if (name == "echo") return gaussian(g) + cplx(0.6, 0.0) * gaussian(g, 1.0, 0.75);
    return fixture(name, g, c.seed);
  };
  // Adversaries: additive bumps, small shifts and modulations, phase twists
  // of one half, all with a global phase.
  struct Adversary {
    std::string kind;
    Signal g;
  };
  auto adversaries = [&](const Signal& f) {
    std::vector<Adversary> out;
    const cplx turn = std::polar(1.0, 0.7);
    for (double t : {0.05, 0.2}) {
      for (auto [cx, eta] : {std::pair{0.0, 0.0}, {1.0, 0.5}, {-1.0, -0.5}, {0.5, 1.0}}) {
        out.push_back({"bump", turn * (f + cplx(t, 0.0) * gaussian(g, cx, eta))});
      }
    }
    for (double u : {0.0625, 0.25}) out.push_back({"shift", turn * translate(f, u)});
    for (double eta : {0.0625, 0.25}) out.push_back({"modulation", turn * modulate(f, eta)});
    for (double theta : {0.5, 1.5, kPi}) {
      Signal h = f;
      for (std::size_t k = 0; k < g.count(); ++k) {
        if (g.point(k) > 0) h[k] *= std::polar(1.0, theta);
      }
      out.push_back({"twist", turn * h});
    }
    return out;
  };

  Table tt{"triples", {"triple", "fixture", "layout", "lambda", "c_a", "c_b", "c_omega", "bound"}, {}};
  Table ta{"adversaries", {"triple", "index", "kind", "ratio_a", "ratio_b", "ratio_omega"}, {}};
  int index = 0;
  for (const auto& tr : gluing_triples(tf)) {
    const auto f = make(tr.fixture);
    const auto F = stft(f, window, tf);
    const auto W = modulus(F);
    const double lambda = connectivity(W, tr.a, tr.b);
    double ca = 0.0, cb = 0.0, co = 0.0;
    int k = 0;
    for (const auto& adv : adversaries(f)) {
      const auto G = stft(adv.g, window, tf);
      const auto diff = W - modulus(G);
      auto ratio = [&](const DomainMask& m) {
        const double d = phase_inf_distance(G, F, DistanceNorm::lq(2.0), &m.inside).distance;
        const double den = h1_norm(diff, m, r);
        return den > 0.0 ? d / den : (d > 0.0 ? kInf : 0.0);
      };
      const double ra = ratio(tr.a), rb = ratio(tr.b), ro = ratio(tr.omega);
      ca = std::max(ca, ra);
      cb = std::max(cb, rb);
      co = std::max(co, ro);
      ta.add({cell(index), cell(k++), adv.kind, cell(ra), cell(rb), cell(ro)});
    }
    tt.add({cell(index), tr.fixture, tr.layout, cell(lambda), cell(ca), cell(cb), cell(co),
            cell(gluing_bound(ca, cb, lambda))});
    ++index;
  }

  Table ar{"arithmetic", {"c_a", "c_b", "lambda", "value", "expected"}, {}};
  for (auto [a, b, l, e] : {std::tuple{1.0, 1.0, 0.5, std::sqrt(2.0) * (2.0 + std::sqrt(2.0))},
                            {3.0, 4.0, 0.25, 5.0 * (4.0 + std::sqrt(2.0))},
                            {0.0, 0.0, 0.3, 0.0},
                            {6.0, 8.0, 0.5, 10.0 * (2.0 + std::sqrt(2.0))}}) {
    ar.add({cell(a), cell(b), cell(l), cell(gluing_bound(a, b, l)), cell(e)});
  }
  c.add(std::move(tt));
  c.add(std::move(ta));
  c.add(std::move(ar));
  c.check({.id = "gluing", .invariant = "geometry_constants.gluing", .table = "triples", .kind = "le",
           .column = "c_omega", .other = "bound", .factor = 1.0 + 1e-6});
  c.check({.id = "gluing-arithmetic", .invariant = "geometry_constants.gluing", .table = "arithmetic",
           .kind = "abs_le", .column = "value", .other = "expected", .value = 0.0});
}

void poincare_square(Context& c) {
  const std::size_t n = c.count("nodes");
  const auto tf = square(1.0, n);
  const auto ones = sample(tf, [](double, double) { return 1.0; });
  const auto rep = poincare_constant(DomainMask::full(tf), ones);
  const double h = 1.0 / static_cast<double>(n);
  const double discrete = 4.0 / (h * h) * std::pow(std::sin(kPi * h / 2.0), 2);
  Table t{"square", {"nodes", "mu1", "oracle", "relative_error", "discrete_oracle", "status"}, {}};
  t.add({cell(n), cell(rep.mu1), cell(kPi * kPi), cell(std::abs(rep.mu1 / (kPi * kPi) - 1.0)), cell(discrete),
         rep.status});

  const auto wide = square(4.0, 64);
  const auto unit = sample(wide, [](double, double) { return 1.0; });
  const auto apart = DomainMask::rect(wide, -1.8, -0.2, -1, 1) | DomainMask::rect(wide, 0.2, 1.8, -1, 1);
  const auto dis = poincare_constant(apart, unit);
  Table d{"disconnected", {"components", "constant", "is_infinite"}, {}};
  d.add({cell(dis.components), cell(dis.constant), cell(std::isinf(dis.constant))});

  Table neck{"neck", {"width", "mu1"}, {}};
  for (double w : {1.0, 0.5, 0.25, 0.125}) {
    const auto m = DomainMask::disk(wide, -1.1, 0, 0.8) | DomainMask::disk(wide, 1.1, 0, 0.8) |
                   DomainMask::rect(wide, -1.1, 1.1, -w / 2, w / 2);
    neck.add({cell(w), cell(poincare_constant(m, unit).mu1)});
  }
  c.add(std::move(t));
  c.add(std::move(d));
  c.add(std::move(neck));
  c.check({.id = "square", .invariant = "geometry_constants.poincare_oracle", .table = "square", .kind = "le",
           .column = "relative_error", .value = c.num("tolerance")});
  c.check({.id = "disconnected", .invariant = "geometry_constants.poincare_disconnected", .table = "disconnected",
           .kind = "true", .column = "is_infinite"});
  c.check({.id = "neck", .invariant = "geometry_constants.poincare_monotone", .table = "neck",
           .kind = "nonincreasing", .column = "mu1"});
}

FockField polynomial(const TFGrid& tf, const std::vector<cplx>& roots, cplx lead = 1.0) {
  FockField f;
  f.values = sample(tf, [&](double x, double w) {
    cplx v = lead;
    for (auto root : roots) v *= cplx(x, w) - root;
    return v;
  });
  return f;
}

void certificate_polynomial(Context& c) {
  const auto tf = square(c.num("L"), c.count("nodes"));
  const auto omega = DomainMask::disk(tf, 0, 0, c.num("radius"));
  const std::vector<std::vector<cplx>> roots{{cplx(0.53, 0.31)},
                                             {cplx(1.03, 0.02), cplx(-0.97, 0.05)},
                                             {cplx(0.4, -0.6), cplx(-0.5, 0.2)},
                                             {cplx(0.0, 1.2), cplx(-0.8, -0.7), cplx(0.9, -0.4)},
                                             {cplx(-1.4, 0.3)}};
  const cplx extra(0.7, -0.2);
  Table t{"certificate", {"fixture", "degree", "t", "t1", "t2", "t3", "poincare", "bound", "distance",
                          "excised_zeros", "excised_fraction"}, {}};
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const auto f1 = polynomial(tf, roots[i]);
    auto more = roots[i];
    more.push_back(extra);
    const auto q = polynomial(tf, more);
    for (double s : c.list("perturbations")) {
      FockField f2 = f1;
      for (std::size_t k = 0; k < tf.size(); ++k) {
        f2.values.values[k] = std::polar(1.0, 0.4) * (f1.values.values[k] + s * q.values.values[k]);
      }
      const auto rep = stability_certificate(f1, f2, omega);
      t.add({cell(i), cell(roots[i].size()), cell(s), cell(rep.t1), cell(rep.t2), cell(rep.t3), cell(rep.poincare),
             cell(rep.bound), cell(rep.distance), cell(rep.excised_zeros), cell(rep.excised_fraction)});
    }
  }
  Table h{"harmless", {"t", "t3", "bound", "distance"}, {}};
  const auto constant = polynomial(tf, {});
  const auto moved = polynomial(tf, {extra});
  for (double s : c.list("perturbations")) {
    FockField f2 = constant;
    for (std::size_t k = 0; k < tf.size(); ++k) f2.values.values[k] += s * moved.values.values[k];
    const auto rep = stability_certificate(constant, f2, omega);
    h.add({cell(s), cell(rep.t3), cell(rep.bound), cell(rep.distance)});
  }
  c.add(std::move(t));
  c.add(std::move(h));
  c.check({.id = "bound-dominates", .invariant = "geometry_constants.certificate", .table = "certificate",
           .kind = "ge", .column = "bound", .other = "distance"});
  c.check({.id = "third-term-vanishes", .invariant = "geometry_constants.certificate", .table = "harmless",
           .kind = "abs_le", .column = "t3", .value = 0.0});
  c.check({.id = "harmless-bound", .invariant = "geometry_constants.certificate", .table = "harmless", .kind = "ge",
           .column = "bound", .other = "distance"});
}

// ---------------------------------------------------------------------------

void modulus_threshold(Context& c) {
  const double pinned = c.num("pinned_constant");
  const NormSpec below{.s = c.num("s"), .p = c.num("p")};
  const NormSpec above{.s = c.num("s_above"), .p = c.num("p")};
  const TFGrid tf = full_stft_grid(make_grid(c.num("L"), c.count("N")));
  Table t{"random", {"index", "ratio"}, {}};
  const int fields = c.integer("fields");
  std::vector<double> ratios(fields);
  for (int i = 0; i < fields; ++i) {
    ratios[i] = modulus_sobolev_ratio(stft(random_smooth(tf.x, c.seed + i), WindowSpec::gaussian(), tf), below);
    t.add({cell(i), cell(ratios[i])});
  }

  // exp(-pi |z|^2 / 4) (sin 2 pi k x + i kappa sin 2 pi k w): a lattice of
  // vortices that degenerate into zero lines as kappa -> 0.
  const auto vt = square(c.num("vortex_L"), c.count("vortex_nodes"));
  Table v{"vortex", {"k", "kappa", "ratio_below", "ratio_above"}, {}};
  for (double k : c.list("vortex_k")) {
    for (double kappa : c.list("vortex_kappa")) {
      const auto F = sample(vt, [&](double x, double w) {
        return std::exp(-kPi * (x * x + w * w) / 4) * cplx(std::sin(2 * kPi * k * x), kappa * std::sin(2 * kPi * k * w));
      });
      v.add({cell(k), cell(kappa), cell(modulus_sobolev_ratio(F, below)), cell(modulus_sobolev_ratio(F, above))});
    }
  }
  c.summary()["random_max"] = *std::max_element(ratios.begin(), ratios.end());
  c.summary()["pinned_constant"] = pinned;
  c.add(std::move(t));
  c.add(std::move(v));
  c.check({.id = "random-below-constant", .invariant = "norms.modulus_threshold", .table = "random", .kind = "le",
           .column = "ratio", .value = pinned});
  c.check({.id = "vortex-exceeds-constant", .invariant = "norms.modulus_threshold", .table = "vortex",
           .kind = "max_ge", .column = "ratio_above", .value = pinned, .gate = false});
}

void disjointness_link(Context& c) {
  const auto forge = gaussian_forge(c);
  const double pinned = c.num("pinned_constant");
  const auto norm = DistanceNorm::lq(c.num("q"));
  Table t{"witness", {"n", "rho", "bound"}, {}};
  for (int n = 1; n < forge.schedule.n_max(); ++n) {
    const auto pair = assemble_pair(forge.schedule, forge.bumps, c.num("delta"), n);
    t.add({cell(n), cell(disjointness_witness(pair.k, pair.c, pair.b, norm)), cell(pinned * std::ldexp(1.0, -2 * n))});
  }
  const auto g = forge.schedule.seed.grid;
  const auto left = gaussian(g, -c.num("edge_offset")), right = gaussian(g, c.num("edge_offset"));
  Signal lone(g), far(g);
  for (std::size_t k = 0; k < g.count(); ++k) {
    (g.point(k) < 0 ? lone : far)[k] = (left + right)[k];
  }
  const auto same = gaussian(g);
  Table e{"edges", {"case", "rho", "expected"}, {}};
  e.add({"disjoint-supports", cell(disjointness_witness(lone + far, lone, far, norm)), cell(0.0)});
  e.add({"identical-halves", cell(disjointness_witness(same + same, same, same, norm)), cell(1.0)});
  c.add(std::move(t));
  c.add(std::move(e));
  c.check({.id = "witness-decay", .invariant = "norms.disjointness_witness", .table = "witness", .kind = "le",
           .column = "rho", .other = "bound"});
  c.check({.id = "edge-cases", .invariant = "norms.disjointness_witness", .table = "edges", .kind = "abs_le",
           .column = "rho", .other = "expected", .value = 0.0});
}

void window_ratio(Context& c) {
  const auto g = make_grid(c.num("L"), c.count("N"));
  Table t{"windows", {"phi", "Phi", "grid_sup", "sup", "zeros", "unresolved", "identity_residual"}, {}};
  auto row = [&](const WindowSpec& a, const WindowSpec& b) {
    const auto wr = window_comparison_ratio(a, b, g);
    double worst = 0.0;
    if (a.name() == b.name()) {
      for (std::size_t i = 0; i < wr.ratio.nx(); ++i) {
        for (std::size_t j = 0; j < wr.ratio.nw(); ++j) {
          const double x = wr.ratio.grid.x.point(i), w = wr.ratio.grid.omega.point(j);
          worst = std::max(worst, std::abs(wr.ratio.at(i, j).real() / std::sqrt(1 + x * x + w * w) - 1.0));
        }
      }
    }
    t.add({a.name(), b.name(), cell(wr.grid_sup), cell(wr.sup), cell(wr.zeros.size()), cell(wr.unresolved),
           cell(worst)});
  };
  row(WindowSpec::gaussian(), WindowSpec::gaussian());
  for (int n = 1; n <= 3; ++n) {
    row(WindowSpec::gaussian(), WindowSpec::hermite(n));
    row(WindowSpec::hermite(n), WindowSpec::gaussian());
  }
  c.add(std::move(t));
  c.check({.id = "self-ratio-is-bracket", .invariant = "tf_transforms.window_ratio", .table = "windows",
           .kind = "le", .column = "identity_residual", .value = 1e-12});
  c.check({.id = "gaussian-over-hermite-finite", .invariant = "tf_transforms.window_ratio", .table = "windows",
           .kind = "le", .column = "sup", .value = 1e300, .where_column = "phi", .where_value = "hermite1",
           .gate = false});
}

}  // namespace

const std::vector<Entry>& entries() {
  static const std::vector<Entry> all = [] {
    const json forge_grid = {{"N", 4096}, {"L", 512.0}, {"sigma", 0.0}, {"p", 2.0}, {"q", 2.0}, {"n_max", 5}};
    auto with = [](json base, const json& extra) {
      for (const auto& [k, v] : extra.items()) base[k] = v;
      return base;
    };
    const json family = {{"N", 8192}, {"L", 128.0}, {"x_extent", 16.0}, {"x_count", 256},
                         {"ladder", {4.0, 8.0, 13.0, 19.0, 26.0}},
                         {"s", 1.0}, {"p", 2.0}, {"r", 1.0}, {"q", 2.0}, {"eps", 0.5}, {"smoothness_gap", 0.25}};
    std::vector<Entry> v;
    v.push_back({{"isometry-sweep", "STFT isometry on 20 fixtures", 10,
                  {{"L", 32.0}, {"N", 512}, {"fixtures", 20}, {"tolerance", 1e-4}}},
                 isometry_sweep});
    v.push_back({{"covariance-lattice", "covariance residual over a 5x5 shift lattice", 30,
                  {{"L", 32.0}, {"N", 512}, {"lattice", 5}, {"u_step", 1.0}, {"eta_step", 0.1875},
                   {"tolerance", 1e-8}}},
                 covariance_lattice});
    v.push_back({{"ambiguity-relation", "ambiguity relation on the self-dual grid", 30,
                  {{"L", 16.0}, {"N", 256}, {"tolerance", 1e-3}}},
                 ambiguity_relation});
    v.push_back({{"recover-noiseless", "ambiguity inversion from exact measurements", 60,
                  {{"L", 16.0}, {"N", 256}, {"tau_factor", 1e-6}, {"tolerance", 1e-2}}},
                 recover_noiseless});
    v.push_back({{"recover-noisy", "ambiguity inversion at fixed SNR (report only)", 60,
                  {{"L", 16.0}, {"N", 256}, {"tau_factor", 1e-6}, {"tolerance", 1e-1}, {"snr_db", 30.0},
                   {"trials", 3}, {"tau_sweep", {1e-3, 1e-2, 1e-1}}}},
                 recover_noisy});
    v.push_back({{"prop21-gaussian-ratio", "bump-sequence ratio R_n against 2^n", 300,
                  with(forge_grid, {{"delta", 0.1}, {"window", {1, 4}}, {"growth", 1.8},
                                    {"deltas", {0.3, 0.1, 0.03}}})},
                 prop21_ratio});
    v.push_back({{"lemma22-bounds", "annulus bump bounds", 60,
                  with(forge_grid, {{"sigmas", {0.0, 1.0}}, {"seeds", {"gaussian", "hermite1"}},
                                    {"gub_tolerance", 1e-10}, {"implicit_constant", 8.0}, {"slope", -3.5}})},
                 lemma22_bounds});
    v.push_back({{"thm15-sobolev-ratio", "STFT family ratio against 2^k", 300, with(family, {{"window", {0, 4}}})},
                 thm15_ratio});
    v.push_back({{"lp-reduction", "Littlewood-Paley reduction constants", 300,
                  with(family, {{"members", {0, 1, 2, 3, 4}}, {"scales", {2, 3, 4, 5, 6}}, {"lp_delta", 0.25},
                                {"pinned_constant", 2.5}})},
                 lp_reduction});
    v.push_back({{"cheeger-gaussian", "Cheeger bound of the Gaussian spectrogram under refinement", 180,
                  {{"L", 16.0}, {"N", 128}, {"tolerance", 0.1}}},
                 cheeger_gaussian});
    v.push_back({{"cheeger-trend", "Cheeger bound against bump count", 180,
                  with(family, {{"N", 512}, {"L", 8.0}, {"x_extent", 8.0}, {"x_count", 128}, {"bumps", 4}, {"drop", 4.0}})},
                 cheeger_trend});
    v.push_back({{"connectivity-gluing", "gluing bound against adversarial constants", 120,
                  {{"L", 16.0}, {"N", 256}, {"x_extent", 8.0}, {"x_count", 128}, {"r", 0.0}}},
                 connectivity_gluing});
    v.push_back({{"poincare-square", "Neumann eigenvalue of the unit square", 60,
                  {{"nodes", 128}, {"tolerance", 0.02}}},
                 poincare_square});
    v.push_back({{"certificate-polynomial", "stability certificate on polynomial Fock fields", 120,
                  {{"L", 8.0}, {"nodes", 128}, {"radius", 2.0}, {"perturbations", {0.01, 0.05, 0.2, 0.5}}}},
                 certificate_polynomial});
    v.push_back({{"modulus-threshold", "modulus map below and above the threshold", 120,
                  {{"L", 8.0}, {"N", 64}, {"fields", 100}, {"s", 1.0}, {"p", 2.0}, {"s_above", 1.6},
                   {"pinned_constant", 1.1}, {"vortex_L", 8.0}, {"vortex_nodes", 256},
                   {"vortex_k", {1.0, 2.0, 4.0}}, {"vortex_kappa", {1.0, 0.3, 0.1, 0.03, 0.0}}}},
                 modulus_threshold});
    v.push_back({{"disjointness-link", "disjointness witness decay and edge cases", 60,
                  with(forge_grid, {{"delta", 0.1}, {"pinned_constant", 1.0}, {"edge_offset", 3.0}})},
                 disjointness_link});
    v.push_back({{"window-ratio", "window comparison ratio (report)", 60, {{"L", 16.0}, {"N", 256}}},
                 window_ratio});
    return v;
  }();
  return all;
}

}  // namespace stftlab::experiments
