#include "stftlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "stftlab/fft.hpp"

namespace stftlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double bracket_sq(const Signal& f, std::size_t k) {
  const double x = f.grid.point(k);
  return 1.0 + x * x;
}

double bracket_sq(const TFField& f, std::size_t k) {
  const double x = f.grid.x.point(k / f.nw());
  const double w = f.grid.omega.point(k % f.nw());
  return 1.0 + x * x + w * w;
}

double measure(const Signal& f) { return f.grid.spacing(); }
double measure(const TFField& f) { return f.grid.cell_area(); }

// Per-sample weights <x>^r (0 where masked out).
template <typename Field>
std::vector<double> weights(const Field& f, double r, const std::vector<std::uint8_t>* mask) {
  std::vector<double> w(f.values.size(), 1.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (mask && !(*mask)[k]) {
      w[k] = 0.0;
    } else if (r != 0.0) {
      w[k] = std::pow(bracket_sq(f, k), r / 2.0);
    }
  }
  return w;
}

double weighted_lp(const std::vector<cplx>& v, const std::vector<double>& w, double p, double dmu) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) m = std::max(m, w[k] * std::abs(v[k]));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (std::size_t k = 0; k < v.size(); ++k) acc += w[k] * w[k] * std::norm(v[k]);
    return std::sqrt(acc * dmu);
  }
  for (std::size_t k = 0; k < v.size(); ++k) acc += std::pow(w[k] * std::abs(v[k]), p);
  return std::pow(acc * dmu, 1.0 / p);
}

template <typename Field>
double lp_impl(const Field& f, double p, double r, const std::vector<std::uint8_t>* mask) {
  if (!(p >= 1.0)) throw Error("L^p exponent must be >= 1");
  if (r < 0.0) throw Error("weight power must be nonnegative");
  if (mask && mask->size() != f.values.size()) throw Error("mask does not match the field");
  return weighted_lp(f.values, weights(f, r, mask), p, measure(f));
}

void apply_multiplier(Signal& f, const std::function<double(double)>& m_of_xi2) {
  const std::size_t n = f.size();
  const Grid1D dual = f.grid.dual();
  fft::centered_transform(f.values, 1.0, fft::Direction::forward);
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = dual.point(k);
    f[k] *= m_of_xi2(xi * xi);
  }
  fft::centered_transform(f.values, 1.0 / static_cast<double>(n), fft::Direction::backward);
}

void apply_multiplier(TFField& f, const std::function<double(double)>& m_of_xi2) {
  const std::size_t nx = f.nx();
  const std::size_t nw = f.nw();
  const Grid1D dx = f.grid.x.dual();
  const Grid1D dw = f.grid.omega.dual();
  fft::centered_transform_2d(f.values, nx, nw, 1.0, fft::Direction::forward);
  for (std::size_t a = 0; a < nx; ++a) {
    const double u = dx.point(a);
    for (std::size_t b = 0; b < nw; ++b) {
      const double v = dw.point(b);
      f.at(a, b) *= m_of_xi2(u * u + v * v);
    }
  }
  fft::centered_transform_2d(f.values, nx, nw, 1.0 / static_cast<double>(nx * nw),
                             fft::Direction::backward);
}

template <typename Field>
Field bessel_impl(const Field& f, double s) {
  Field out = f;
  if (s == 0.0) return out;
  apply_multiplier(out, [s](double xi2) { return std::pow(1.0 + xi2, s / 2.0); });
  return out;
}

double nyquist(const Signal& f) { return f.grid.dual().length() / 2.0; }
double nyquist(const TFField& f) {
  return std::max(f.grid.x.dual().length(), f.grid.omega.dual().length()) / 2.0;
}

template <typename Field>
Field lp_impl(const Field& f, int j, LPMode mode) {
  const double scale = std::ldexp(1.0, j);
  if (scale > nyquist(f)) throw Error("Littlewood-Paley scale above the Nyquist frequency");
  Field low = f;
  apply_multiplier(low, [scale](double xi2) { return lp_profile(std::sqrt(xi2) / scale); });
  if (mode == LPMode::below) return low;
  Field high = f;
  for (std::size_t k = 0; k < high.values.size(); ++k) high.values[k] -= low.values[k];
  return high;
}

// Everything a norm of lambda F - G needs, precomputed once.
struct Prepared {
  const DistanceNorm* norm;
  std::vector<cplx> f, g, df, dg;
  std::vector<double> wr, w1;
  double dmu;

  double operator()(cplx lambda) const {
    const NormSpec& s = norm->spec;
    std::vector<cplx> diff(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) diff[k] = lambda * f[k] - g[k];
    if (norm->kind == DistanceNorm::Kind::lq) return weighted_lp(diff, w1, s.q, dmu);
    double total = weighted_lp(diff, wr, s.p, dmu);
    if (norm->kind == DistanceNorm::Kind::sobolev_lq) total += weighted_lp(diff, w1, s.q, dmu);
    for (std::size_t k = 0; k < f.size(); ++k) diff[k] = lambda * df[k] - dg[k];
    return total + weighted_lp(diff, w1, s.p, dmu);
  }
};

template <typename Field>
Prepared prepare(const Field& f, const Field& g, const DistanceNorm& norm,
                 const std::vector<std::uint8_t>* mask) {
  if (!(f.grid == g.grid)) throw Error("phase distance: mismatched grids");
  if (mask && norm.kind != DistanceNorm::Kind::lq) throw Error("domain masks need an L^q norm");
  if (mask && mask->size() != f.values.size()) throw Error("mask does not match the field");
  norm.spec.validate();
  Prepared p{&norm, f.values, g.values, {}, {}, weights(f, norm.spec.r, mask), weights(f, 0.0, mask),
             measure(f)};
  if (norm.kind != DistanceNorm::Kind::lq) {
    p.df = bessel_impl(f, norm.spec.s).values;
    p.dg = bessel_impl(g, norm.spec.s).values;
  }
  return p;
}

PhaseDistanceResult distance_impl(const Prepared& obj, const DistanceNorm& norm) {
  PhaseDistanceResult out;
  if (norm.kind == DistanceNorm::Kind::lq && norm.spec.q == 2.0) {
    cplx ip = 0.0;
    double nf = 0.0, ng = 0.0;
    for (std::size_t k = 0; k < obj.f.size(); ++k) {
      if (obj.w1[k] == 0.0) continue;
      ip += std::conj(obj.f[k]) * obj.g[k];
      nf += std::norm(obj.f[k]);
      ng += std::norm(obj.g[k]);
    }
    out.method = "closed-form";
    // Orthogonal up to rounding: every unit lambda is optimal.
    if (std::abs(ip) <= 1e-14 * std::sqrt(nf * ng)) {
      out.degenerate = true;
      out.lambda = 1.0;
    } else {
      out.lambda = ip / std::abs(ip);
    }
    out.distance = obj(out.lambda);
    return out;
  }
  out.method = "scan+refine";
  constexpr int kScan = 720;
  const double step = kTwoPi / kScan;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    const double v = obj(std::polar(1.0, i * step));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = (best - 1) * step;
  double hi = (best + 1) * step;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = obj(std::polar(1.0, c));
  double fd = obj(std::polar(1.0, d));
  while (hi - lo > 1e-10) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = obj(std::polar(1.0, c));
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = obj(std::polar(1.0, d));
    }
  }
  const double theta = 0.5 * (lo + hi);
  const double refined = obj(std::polar(1.0, theta));
  if (refined <= best_val) {
    out.lambda = std::polar(1.0, theta);
    out.distance = refined;
  } else {
    out.lambda = std::polar(1.0, best * step);
    out.distance = best_val;
  }
  return out;
}

template <typename Field>
double witness_impl(const Field& f, const Field& g, const Field& h, const DistanceNorm& norm) {
  if (!(f.grid == g.grid) || !(f.grid == h.grid)) throw Error("witness: mismatched grids");
  double defect = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    defect = std::max(defect, std::abs(f.values[k] - g.values[k] - h.values[k]));
  }
  if (defect > 1e-8 * sup_norm(f.values)) throw Error("witness: f != g + h");
  const double ng = norm(g);
  const double nh = norm(h);
  if (ng == 0.0 || nh == 0.0) throw Error("witness: zero part");
  Field m = g;
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    m.values[k] = std::min(std::abs(g.values[k]), std::abs(h.values[k]));
  }
  return norm(m) / std::min(ng, nh);
}

template <typename Field>
double modulus_ratio_impl(const Field& f, const NormSpec& spec) {
  const double denom = frac_sobolev_norm(f, spec);
  if (denom == 0.0) throw Error("modulus ratio of the zero field");
  Field m = f;
  for (auto& v : m.values) v = std::abs(v);
  return frac_sobolev_norm(m, spec) / denom;
}

template <typename Field>
double sobolev_impl(const Field& f, const NormSpec& spec) {
  spec.validate();
  return lp_impl(f, spec.p, spec.r, nullptr) + lp_impl(bessel_impl(f, spec.s), spec.p, 0.0, nullptr);
}

}  // namespace

void NormSpec::validate() const {
  if (!(s >= 0.0)) throw Error("norm spec: s must be >= 0");
  if (!(p >= 1.0)) throw Error("norm spec: p must be >= 1");
  if (!(q >= 1.0)) throw Error("norm spec: q must be >= 1");
  if (!(r >= 0.0)) throw Error("norm spec: r must be >= 0");
  if (!(sigma >= 0.0)) throw Error("norm spec: sigma must be >= 0");
}

double lp_weighted_norm(const Signal& f, double p, double r) { return lp_impl(f, p, r, nullptr); }
double lp_weighted_norm(const TFField& f, double p, double r, const std::vector<std::uint8_t>* mask) {
  return lp_impl(f, p, r, mask);
}

Signal bessel_potential(const Signal& f, double s) { return bessel_impl(f, s); }
TFField bessel_potential(const TFField& f, double s) { return bessel_impl(f, s); }

double frac_sobolev_norm(const Signal& f, const NormSpec& spec) { return sobolev_impl(f, spec); }
double frac_sobolev_norm(const TFField& f, const NormSpec& spec) { return sobolev_impl(f, spec); }

double lp_profile(double t) {
  t = std::abs(t);
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const auto g = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  const double a = g(2.0 - t);
  return a / (a + g(t - 1.0));
}

Signal littlewood_paley(const Signal& f, int j, LPMode mode) { return lp_impl(f, j, mode); }
TFField littlewood_paley(const TFField& f, int j, LPMode mode) { return lp_impl(f, j, mode); }

DistanceNorm DistanceNorm::lq(double q) {
  DistanceNorm n;
  n.kind = Kind::lq;
  n.spec.q = q;
  n.spec.validate();
  return n;
}

DistanceNorm DistanceNorm::sobolev(const NormSpec& spec) {
  spec.validate();
  return DistanceNorm{Kind::sobolev, spec};
}

DistanceNorm DistanceNorm::sobolev_lq(const NormSpec& spec) {
  spec.validate();
  return DistanceNorm{Kind::sobolev_lq, spec};
}

double DistanceNorm::operator()(const Signal& f) const {
  return prepare(f, Signal(f.grid), *this, nullptr)(cplx(1.0));
}

double DistanceNorm::operator()(const TFField& f) const {
  return prepare(f, TFField(f.grid), *this, nullptr)(cplx(1.0));
}

std::string DistanceNorm::name() const {
  auto num = [](double v) {
    if (std::isinf(v)) return std::string("inf");
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  };
  switch (kind) {
    case Kind::lq: return "L^" + num(spec.q);
    case Kind::sobolev: return "W^{" + num(spec.s) + "," + num(spec.p) + "}_" + num(spec.r);
    case Kind::sobolev_lq:
      return "W^{" + num(spec.s) + "," + num(spec.p) + "}_" + num(spec.r) + "+L^" + num(spec.q);
  }
  return "?";
}

PhaseDistanceResult phase_inf_distance(const Signal& f, const Signal& g, const DistanceNorm& norm) {
  return distance_impl(prepare(f, g, norm, nullptr), norm);
}

PhaseDistanceResult phase_inf_distance(const TFField& f, const TFField& g, const DistanceNorm& norm,
                                       const std::vector<std::uint8_t>* mask) {
  return distance_impl(prepare(f, g, norm, mask), norm);
}

double disjointness_witness(const Signal& f, const Signal& g, const Signal& h, const DistanceNorm& norm) {
  return witness_impl(f, g, h, norm);
}

double disjointness_witness(const TFField& f, const TFField& g, const TFField& h,
                            const DistanceNorm& norm) {
  return witness_impl(f, g, h, norm);
}

double modulus_sobolev_ratio(const Signal& f, const NormSpec& spec) { return modulus_ratio_impl(f, spec); }
double modulus_sobolev_ratio(const TFField& f, const NormSpec& spec) { return modulus_ratio_impl(f, spec); }

}  // namespace stftlab
