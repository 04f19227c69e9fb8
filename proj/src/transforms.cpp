#include "stftlab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stftlab/fft.hpp"
#include "stftlab/parallel.hpp"

namespace stftlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Signal-grid index of every TF x-point.
std::vector<std::size_t> column_offsets(const Grid1D& signal, const Grid1D& xaxis) {
  std::vector<std::size_t> idx(xaxis.count());
  for (std::size_t a = 0; a < xaxis.count(); ++a) {
    const auto k = signal.index_of(xaxis.point(a));
    if (!k) throw Error("TF x-axis point is not a signal sample");
    idx[a] = *k;
  }
  return idx;
}

void require_stft_grid(const Grid1D& signal, const TFGrid& tf) {
  if (!(tf.omega == signal.dual())) throw Error("TF omega-axis must be the dual grid of the signal");
  if (tf.x.length() > signal.length() * (1.0 + 1e-12)) throw Error("TF x-axis exceeds the signal window");
}

}  // namespace

WindowSpec WindowSpec::hermite(int order) {
  if (order < 0) throw Error("hermite window order must be nonnegative");
  return WindowSpec(Kind::hermite, order, std::nullopt);
}

WindowSpec WindowSpec::sampled(Signal samples) {
  const double n = l2_norm(samples);
  if (std::abs(n - 1.0) > 1e-6) throw Error("sampled window must have unit L2 norm");
  return WindowSpec(Kind::sampled, 0, std::move(samples));
}

std::string WindowSpec::name() const {
  switch (kind_) {
    case Kind::gaussian: return "gaussian";
    case Kind::hermite: return "hermite" + std::to_string(order_);
    case Kind::sampled: return "sampled";
  }
  return "unknown";
}

Signal WindowSpec::on(const Grid1D& grid) const {
  switch (kind_) {
    case Kind::gaussian: return stftlab::gaussian(grid);
    case Kind::hermite: return stftlab::hermite(grid, order_);
    case Kind::sampled:
      if (!(samples_->grid == grid)) throw Error("sampled window lives on a different grid");
      return *samples_;
  }
  throw Error("unknown window kind");
}

TFGrid stft_grid(const Grid1D& signal, double x_extent, std::size_t x_count) {
  const TFGrid tf{Grid1D::make(x_extent, x_count), signal.dual()};
  require_stft_grid(signal, tf);
  column_offsets(signal, tf.x);
  if (!signal.steps_of(tf.x.spacing())) throw Error("TF x-spacing must be a multiple of the signal spacing");
  return tf;
}

TFGrid full_stft_grid(const Grid1D& signal) { return TFGrid{signal, signal.dual()}; }

bool is_self_dual(const TFGrid& tf) {
  return tf.x.count() == tf.omega.count() && std::abs(tf.x.length() - tf.omega.length()) <= 1e-12 * tf.x.length();
}

TFGrid self_dual_grid(const Grid1D& signal) {
  TFGrid tf = full_stft_grid(signal);
  if (!is_self_dual(tf)) throw Error("signal grid is not self-dual (need L^2 = N)");
  return tf;
}

TFField stft(const Signal& f, const WindowSpec& window, const TFGrid& tf) {
  require_finite(f.values, "stft");
  require_stft_grid(f.grid, tf);
  const Signal phi = window.on(f.grid);
  const auto offsets = column_offsets(f.grid, tf.x);
  const std::size_t n = f.size();
  const std::size_t center = n / 2;  // index of x = 0
  TFField out(tf);
  parallel_for(tf.x.count(), [&](std::size_t a) {
    std::span<cplx> col(out.values.data() + a * n, n);
    // phi(t_k - x_a) sits at window index k - (offset - center).
    const std::size_t shift = (offsets[a] + n - center) % n;
    for (std::size_t k = 0; k < n; ++k) {
      col[k] = f[k] * std::conj(phi[(k + n - shift) % n]);
    }
    fft::centered_transform(col, f.grid.spacing(), fft::Direction::forward);
  });
  return out;
}

double covariance_residual(const Signal& f, const WindowSpec& window, const TFGrid& tf, double u,
                           double eta) {
  const auto du = tf.x.steps_of(u);
  const auto de = tf.omega.steps_of(eta);
  if (!du || !de) throw Error("covariance shifts must be on the TF grid");
  const Signal moved = translate(modulate(f, eta), u);
  const TFField lhs = stft(moved, window, tf);
  const TFField base = stft(f, window, tf);
  const auto nx = static_cast<std::int64_t>(tf.x.count());
  const auto nw = static_cast<std::int64_t>(tf.omega.count());
  const bool periodic_x = std::abs(tf.x.length() - f.grid.length()) <= 1e-12 * f.grid.length();
  double worst = 0.0;
  for (std::int64_t a = 0; a < nx; ++a) {
    std::int64_t src_a = a - *du;
    if (periodic_x) {
      src_a = ((src_a % nx) + nx) % nx;
    } else if (src_a < 0 || src_a >= nx) {
      continue;
    }
    for (std::int64_t b = 0; b < nw; ++b) {
      const std::int64_t src_b = (((b - *de) % nw) + nw) % nw;
      const double w = tf.omega.point(static_cast<std::size_t>(b));
      const cplx rhs = std::polar(1.0, -2.0 * kPi * u * w) *
                       base.at(static_cast<std::size_t>(src_a), static_cast<std::size_t>(src_b));
      worst = std::max(worst, std::abs(lhs.at(a, b) - rhs));
    }
  }
  return worst;
}

TFField ambiguity(const Signal& f, const TFGrid& tf) {
  TFField out = stft(f, WindowSpec::sampled_unchecked(f), tf);
  for (std::size_t a = 0; a < out.nx(); ++a) {
    const double x = tf.x.point(a);
    for (std::size_t b = 0; b < out.nw(); ++b) {
      out.at(a, b) *= std::polar(1.0, kPi * x * tf.omega.point(b));
    }
  }
  return out;
}

TFField ambiguity(const Signal& f) { return ambiguity(f, full_stft_grid(f.grid)); }

TFField phaseless(const Signal& f, const WindowSpec& window, const TFGrid& tf) {
  TFField v = stft(f, window, tf);
  for (auto& c : v.values) c = std::norm(c);
  return v;
}

TFField measurement_spectrum(const TFField& measurement) {
  const TFGrid& tf = measurement.grid;
  if (!is_self_dual(tf)) throw Error("ambiguity relation needs a square self-dual TF grid");
  const std::size_t n = tf.x.count();
  std::vector<cplx> spec = measurement.values;
  fft::centered_transform_2d(spec, n, n, tf.cell_area(), fft::Direction::forward);
  // spec[i1][i2] holds xi1 on the omega grid and xi2 on the x grid.
  TFField out(tf);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t neg_a = (n - a) % n;
    for (std::size_t b = 0; b < n; ++b) out.at(a, b) = spec[b * n + neg_a];
  }
  return out;
}

double ambiguity_relation_residual(const Signal& f, const WindowSpec& window) {
  const TFGrid tf = self_dual_grid(f.grid);
  const TFField lhs = measurement_spectrum(phaseless(f, window, tf));
  const TFField af = ambiguity(f, tf);
  const TFField aphi = ambiguity(window.on(f.grid), tf);
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < lhs.values.size(); ++k) {
    const cplx rhs = af.values[k] * std::conj(aphi.values[k]);
    worst = std::max(worst, std::abs(lhs.values[k] - rhs));
    scale = std::max(scale, std::abs(rhs));
  }
  return scale > 0.0 ? worst / scale : worst;
}

namespace {

double laguerre(int n, double t) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 - t;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 - t) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

bool has_closed_form(const WindowSpec& w) { return w.kind() != WindowSpec::Kind::sampled; }

}  // namespace

double hermite_ambiguity(int n, double x, double w) {
  const double t = kPi * (x * x + w * w);
  return laguerre(n, t) * std::exp(-t / 2.0);
}

WindowRatio window_comparison_ratio(const WindowSpec& phi, const WindowSpec& Phi,
                                    const Grid1D& signal_grid) {
  const TFGrid tf = full_stft_grid(signal_grid);
  const std::size_t nx = tf.x.count();
  const std::size_t nw = tf.omega.count();
  WindowRatio out{TFField(tf), 0.0, 0.0, {}, 0};

  // Values whose ratio is the window ratio; real-valued when both windows
  // have closed forms (the common Gaussian factor is dropped).
  TFField num(tf), den(tf);
  const bool analytic = has_closed_form(phi) && has_closed_form(Phi);
  if (analytic) {
    for (std::size_t a = 0; a < nx; ++a) {
      for (std::size_t b = 0; b < nw; ++b) {
        const double t = kPi * (std::pow(tf.x.point(a), 2) + std::pow(tf.omega.point(b), 2));
        num.at(a, b) = laguerre(phi.order(), t);
        den.at(a, b) = laguerre(Phi.order(), t);
      }
    }
  } else {
    num = ambiguity(phi.on(signal_grid), tf);
    den = ambiguity(Phi.on(signal_grid), tf);
  }
  const double den_floor = analytic ? 0.0 : 1e-13 * sup_norm(den.values);
  const double num_floor = analytic ? 0.0 : 1e-13 * sup_norm(num.values);

  std::vector<std::uint8_t> resolved(tf.size(), 1);
  for (std::size_t a = 0; a < nx; ++a) {
    const double x = tf.x.point(a);
    for (std::size_t b = 0; b < nw; ++b) {
      const double w = tf.omega.point(b);
      const double d = std::abs(den.at(a, b));
      const double n = std::abs(num.at(a, b));
      if (!analytic && d <= den_floor && n <= num_floor) {
        resolved[a * nw + b] = 0;
        ++out.unresolved;
        out.ratio.at(a, b) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const double r = d > 0.0 ? std::sqrt(1.0 + x * x + w * w) * n / d
                               : std::numeric_limits<double>::infinity();
      out.ratio.at(a, b) = r;
      out.grid_sup = std::max(out.grid_sup, r);
      if (d == 0.0) out.zeros.emplace_back(x, w);
    }
  }

  // Zero curves of a real ambiguity function show up as sign changes
  // between neighbouring samples; otherwise fall back to phase winding.
  double max_re = 0.0;
  double max_im = 0.0;
  for (const auto& v : den.values) {
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  if (max_im <= 1e-8 * max_re) {
    for (std::size_t a = 0; a + 1 < nx; ++a) {
      for (std::size_t b = 0; b + 1 < nw; ++b) {
        if (!resolved[a * nw + b]) continue;
        const double v = den.at(a, b).real();
        const double right = den.at(a + 1, b).real();
        const double up = den.at(a, b + 1).real();
        if (v * right < 0.0 && resolved[(a + 1) * nw + b]) {
          const double t = v / (v - right);
          out.zeros.emplace_back(tf.x.point(a) + t * tf.x.spacing(), tf.omega.point(b));
        }
        if (v * up < 0.0 && resolved[a * nw + b + 1]) {
          const double t = v / (v - up);
          out.zeros.emplace_back(tf.x.point(a), tf.omega.point(b) + t * tf.omega.spacing());
        }
      }
    }
  } else {
    for (const auto& [a, b] : find_zero_cells(den, &resolved)) {
      out.zeros.emplace_back(tf.x.point(a) + 0.5 * tf.x.spacing(),
                             tf.omega.point(b) + 0.5 * tf.omega.spacing());
    }
  }
  out.sup = out.zeros.empty() ? out.grid_sup : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace stftlab
