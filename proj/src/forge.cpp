#include "stftlab/forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stftlab {

namespace {

double bracket(double x) { return std::sqrt(1.0 + x * x); }

double masked_lp(const Signal& f, double p, double w, const std::vector<std::uint8_t>& inside) {
  const bool all = inside.empty();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (all || inside[k]) m = std::max(m, std::pow(bracket(f.grid.point(k)), w) * std::abs(f[k]));
    }
    return m;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!all && !inside[k]) continue;
    const double v = std::abs(f[k]) * (w == 0.0 ? 1.0 : std::pow(bracket(f.grid.point(k)), w));
    acc += p == 2.0 ? v * v : std::pow(v, p);
  }
  return std::pow(acc * f.grid.spacing(), 1.0 / p);
}

std::vector<std::uint8_t> complement(std::vector<std::uint8_t> m) {
  for (auto& v : m) v = v ? 0 : 1;
  return m;
}

template <typename Field>
Field modulus_difference_impl(const Field& c, const Field& b) {
  if (!(c.grid == b.grid)) throw Error("modulus difference: mismatched grids");
  Field out = c;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const cplx cv = c.values[k];
    const cplx bv = b.values[k];
    const double den = std::abs(cv + bv) + std::abs(cv - bv);
    out.values[k] = den > 0.0 ? 4.0 * std::real(cv * std::conj(bv)) / den : 0.0;
  }
  return out;
}

}  // namespace

double mixed_norm(const Signal& f, double p, double w1, double q, double w2,
                  const std::vector<std::uint8_t>& inside) {
  return masked_lp(f, p, w1, inside) + masked_lp(f, q, w2, inside);
}

std::vector<std::uint8_t> shell(const Grid1D& g, double lo, double hi) {
  std::vector<std::uint8_t> m(g.count(), 0);
  const double slack = 1e-9 * g.spacing();
  for (std::size_t k = 0; k < g.count(); ++k) {
    const double r = std::abs(g.point(k));
    m[k] = (r >= lo - slack && r <= hi + slack) ? 1 : 0;
  }
  return m;
}

AnnulusSchedule select_annulus_schedule(const Signal& h, double sigma, double p, double q, int n_max) {
  if (sigma < 0.0 || p < 1.0 || std::isinf(p) || q < 1.0) throw Error("schedule: need sigma >= 0, 1 <= p < inf, q >= 1");
  if (n_max < 1) throw Error("schedule: n_max must be positive");
  require_finite(h.values, "schedule seed");
  const Grid1D& g = h.grid;

  std::size_t peak = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (std::abs(h[k]) > std::abs(h[peak])) peak = k;
  }
  AnnulusSchedule s;
  s.sigma = sigma;
  s.p = p;
  s.q = q;
  s.recentre_shift = -g.point(peak);
  s.seed = translate(h, s.recentre_shift);
  const auto ball = shell(g, 0.0, 1.0);
  const double mass = std::min(masked_lp(s.seed, p, 0.0, ball), masked_lp(s.seed, q, 0.0, ball));
  if (!(mass > 0.0)) throw Error("schedule: seed has no mass on the unit ball");
  s.normalization = 1.0 / mass;
  s.seed *= s.normalization;

  const double half = g.length() / 2.0;
  double prev = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double target = std::ldexp(1.0, -3 * n);
    double j = std::max(2.0, 2.0 * prev + 1.0);
    for (;;) {
      if (2.0 * j + 4.0 > half) {
        std::ostringstream msg;
        msg << "schedule: grid too small for annulus " << n << "; need L >= " << 2.0 * (2.0 * j + 4.0);
        throw Error(msg.str());
      }
      const bool on_grid = g.index_of(1.5 * j).has_value();
      if (on_grid && mixed_norm(s.seed, p, 2.0 * sigma, q, sigma, shell(g, j / 2.0, half)) <= target) break;
      j += 1.0;
    }
    s.radii.push_back(j);
    s.scales.push_back(std::ldexp(1.0, -n) * std::pow(bracket(j), -sigma));
    s.tails.push_back(mixed_norm(s.seed, p, 2.0 * sigma, q, sigma, shell(g, j / 2.0, half)));
    prev = j;
  }
  return s;
}

std::vector<Signal> build_bumps(const AnnulusSchedule& schedule) {
  std::vector<Signal> bumps;
  for (int n = 1; n <= schedule.n_max(); ++n) {
    Signal e = translate(schedule.seed, 1.5 * schedule.radii[n - 1]);
    e *= schedule.scales[n - 1];
    bumps.push_back(std::move(e));
  }
  return bumps;
}

std::vector<LemmaRow> verify_lemma_bounds(const AnnulusSchedule& s, const std::vector<Signal>& bumps) {
  if (static_cast<int>(bumps.size()) != s.n_max()) throw Error("lemma: bumps do not match the schedule");
  const Signal& h = s.seed;
  const Grid1D& g = h.grid;
  const double h_x = mixed_norm(h, s.p, s.sigma, s.q, 0.0);
  const double h_lp = masked_lp(h, s.q, 0.0, {}) + masked_lp(h, s.p, 0.0, {});
  std::vector<LemmaRow> rows;
  for (int n = 1; n <= s.n_max(); ++n) {
    const double j = s.radii[n - 1];
    const double scale = s.scales[n - 1];
    const double weight = std::pow(bracket(j), s.sigma);
    const auto& e = bumps[n - 1];
    const auto annulus = shell(g, j, 2.0 * j);
    const auto outside = complement(annulus);
    LemmaRow row;
    row.n = n;
    row.j = j;
    row.gub_x = mixed_norm(e, s.p, s.sigma, s.q, 0.0) * std::ldexp(1.0, n) / h_x;
    row.gub_lp = (masked_lp(e, s.q, 0.0, {}) + masked_lp(e, s.p, 0.0, {})) / (scale * h_lp);
    row.mcb = masked_lp(e, s.q, 0.0, annulus) * std::ldexp(1.0, n) * weight;
    row.mtb_value = masked_lp(e, s.p, s.sigma, outside);
    row.mtb = row.mtb_value * std::ldexp(1.0, 4 * n) * weight;
    for (int l = 1; l < n; ++l) row.sob_value = std::max(row.sob_value, masked_lp(bumps[l - 1], s.p, s.sigma, annulus));
    row.sob = row.sob_value * std::ldexp(1.0, 3 * n) * weight;
    row.mtb_slope = n == 1 ? std::numeric_limits<double>::quiet_NaN()
                           : std::log2(row.mtb_value / rows.back().mtb_value);
    const double total = masked_lp(e, 2.0, 0.0, {});
    const double leak = masked_lp(e, 2.0, 0.0, complement(shell(g, j - 1.0, 2.0 * j + 1.0)));
    row.support_leak = total > 0.0 ? (leak * leak) / (total * total) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

InstabilityPair assemble_pair(const AnnulusSchedule& s, const std::vector<Signal>& bumps, double delta, int n) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("pair: delta must lie in (0, 1)");
  if (n < 0 || n > s.n_max()) throw Error("pair: n out of range");
  InstabilityPair pair;
  pair.n = n;
  pair.delta = delta;
  pair.target = std::ldexp(1.0, n);
  pair.c = s.seed;
  pair.b = Signal(s.seed.grid);
  for (int j = 1; j <= s.n_max(); ++j) {
    Signal term = delta * bumps[j - 1];
    (j <= n ? pair.c : pair.b) += term;
  }
  pair.k = pair.c + pair.b;
  pair.kn = pair.c - pair.b;
  return pair;
}

Signal modulus_difference(const Signal& c, const Signal& b) { return modulus_difference_impl(c, b); }
TFField modulus_difference(const TFField& c, const TFField& b) { return modulus_difference_impl(c, b); }

RatioResult instability_ratio(const InstabilityPair& pair, const AnnulusSchedule& s) {
  RatioResult out;
  const auto d = phase_inf_distance(pair.kn, pair.k, DistanceNorm::lq(s.q));
  out.numerator = d.distance;
  out.lambda = d.lambda;
  out.denominator = masked_lp(modulus_difference(pair.c, pair.b), s.p, s.sigma, {});
  if (out.denominator > 0.0) {
    out.ratio = out.numerator / out.denominator;
    out.status = "finite";
  } else if (out.numerator > 0.0) {
    out.ratio = std::numeric_limits<double>::infinity();
    out.status = "exact_disjoint";
  } else {
    out.ratio = 0.0;
    out.status = "degenerate";
  }
  return out;
}

LowerBoundCheck lowerbound_dichotomy(const InstabilityPair& pair, const AnnulusSchedule& s,
                                     const std::vector<Signal>& bumps, int samples) {
  LowerBoundCheck out;
  double bump_mass = 0.0;
  for (const auto& e : bumps) bump_mass += masked_lp(e, s.q, 0.0, {});
  out.bound = 0.5 * masked_lp(s.seed, s.q, 0.0, {}) - 2.0 * pair.delta * bump_mass;
  out.min_measured = std::numeric_limits<double>::infinity();
  for (int m = 0; m < samples; ++m) {
    const cplx lambda = std::polar(1.0, 2.0 * std::numbers::pi * m / samples);
    if (std::abs(lambda - 1.0) < 0.5) continue;
    ++out.lambdas;
    out.min_measured = std::min(out.min_measured, masked_lp(pair.k - lambda * pair.kn, s.q, 0.0, {}));
  }
  out.holds = out.bound > 0.0 && out.min_measured >= out.bound;
  return out;
}

Signal StftFamily::common(int k) const {
  Signal out = f;
  for (int n = 1; n <= std::min(k, n_max()); ++n) out += weights[n - 1] * modulate(f, spec.ladder[n - 1]);
  return out;
}

Signal StftFamily::flipped(int k) const {
  Signal out(f.grid);
  for (int n = std::max(k, 0) + 1; n <= n_max(); ++n) out += weights[n - 1] * modulate(f, spec.ladder[n - 1]);
  return out;
}

StftFamily stft_instability_family(const Signal& f, const WindowSpec& window, const TFGrid& tf,
                                   const FamilySpec& spec) {
  if (spec.ladder.empty()) throw Error("family: empty modulation ladder");
  if (!(spec.eps > 0.0)) throw Error("family: eps must be positive");
  const Grid1D dual = f.grid.dual();
  double prev = 0.0;
  for (double a : spec.ladder) {
    if (!(a > prev)) throw Error("family: ladder must be positive and increasing");
    if (!dual.index_of(a) || a + 4.0 > dual.length() / 2.0) {
      std::ostringstream msg;
      msg << "family: modulation " << a << " needs an omega grid of extent >= " << 2.0 * (a + 4.0);
      throw Error(msg.str());
    }
    prev = a;
  }
  StftFamily fam;
  fam.f = f;
  fam.window = window;
  fam.tf = tf;
  fam.spec = spec;
  const double s_prime = spec.s + spec.smoothness_gap;
  const auto closeness_norm = DistanceNorm::sobolev_lq({.s = s_prime, .p = spec.p, .r = spec.r, .q = spec.q});
  for (std::size_t n = 0; n < spec.ladder.size(); ++n) {
    const double nrm = closeness_norm(stft(modulate(f, spec.ladder[n]), window, tf));
    fam.bump_norms.push_back(nrm);
    fam.weights.push_back(spec.eps * std::ldexp(1.0, -static_cast<int>(n) - 2) / nrm);
  }
  fam.base_norm_2r = DistanceNorm::sobolev_lq({.s = s_prime, .p = spec.p, .r = 2.0 * spec.r, .q = spec.q})(
      stft(f, window, tf));
  fam.closeness = closeness_norm(stft(fam.flipped(0), window, tf));
  return fam;
}

FamilyRow evaluate_family_member(const StftFamily& fam, int k, const std::vector<int>& lp_scales, double lp_delta) {
  if (k < 0 || k >= fam.n_max()) throw Error("family: member index out of range");
  const auto& sp = fam.spec;
  const TFField a = stft(fam.common(k), fam.window, fam.tf);
  const TFField b = stft(fam.flipped(k), fam.window, fam.tf);
  const TFField v_eps = a + b;
  const TFField v_k = a - b;

  FamilyRow row;
  row.k = k;
  row.numerator = phase_inf_distance(v_k, v_eps, DistanceNorm::lq(sp.q)).distance;
  const TFField d = modulus_difference(a, b);
  row.denominator = frac_sobolev_norm(d, {.s = sp.s, .p = sp.p, .r = sp.r});
  row.ratio = row.denominator > 0.0 ? row.numerator / row.denominator : std::numeric_limits<double>::infinity();

  const NormSpec plain{.s = sp.s, .p = sp.p};
  const NormSpec smoother{.s = sp.s + lp_delta, .p = sp.p};
  const double lhs = frac_sobolev_norm(d, plain);
  const double top = frac_sobolev_norm(modulus(v_k), smoother) + frac_sobolev_norm(modulus(v_eps), smoother);
  const double d_lp = lp_weighted_norm(d, sp.p);
  for (int j : lp_scales) {
    LpCheck c;
    c.j = j;
    // Split through the projections themselves, then bound each piece.
    const double split = frac_sobolev_norm(littlewood_paley(d, j, LPMode::below), plain) +
                         frac_sobolev_norm(littlewood_paley(d, j, LPMode::at_or_above), plain);
    c.lhs = std::max(lhs, split);
    c.low = std::pow(2.0, j * sp.s) * d_lp;
    c.high = std::pow(2.0, -j * lp_delta) * top;
    c.constant = c.lhs / (c.low + c.high);
    c.bound = std::max(2.0, (1.0 + std::pow(1.0 + std::ldexp(1.0, 2 * (j + 1)), sp.s / 2.0)) / std::pow(2.0, j * sp.s));
    row.lp.push_back(c);
  }
  return row;
}

}  // namespace stftlab
