#include <algorithm>
#include <cmath>

#include "stftlab/geometry.hpp"

namespace stftlab {

namespace {

std::vector<std::uint8_t> classify(const std::vector<double>& level) {
  std::vector<std::uint8_t> in(level.size());
  for (std::size_t k = 0; k < level.size(); ++k) in[k] = level[k] >= 0.0 ? 1 : 0;
  return in;
}

template <typename Fn>
DomainMask level_mask(const TFGrid& g, Fn&& fn) {
  std::vector<double> level(g.size());
  const std::size_t nw = g.omega.count();
  for (std::size_t a = 0; a < g.x.count(); ++a) {
    for (std::size_t b = 0; b < nw; ++b) level[a * nw + b] = fn(g.x.point(a), g.omega.point(b));
  }
  return DomainMask::from_level(g, std::move(level));
}

void same_grid(const DomainMask& a, const DomainMask& b) {
  if (!(a.grid == b.grid)) throw Error("mask: grids differ");
}

struct Crossing {
  double u, v;  // local cell coordinates in [0, 1]
};

// Calls fn(ix, iw, p, q) for each boundary segment; p, q in cell coordinates.
template <typename Fn>
void for_each_segment(const DomainMask& m, Fn&& fn) {
  const std::size_t nx = m.grid.x.count();
  const std::size_t nw = m.grid.omega.count();
  if (nx < 2 || nw < 2) return;
  const auto& l = m.level;
  auto cut = [](double la, double lb) {
    const double den = la - lb;
    return den == 0.0 ? 0.5 : std::clamp(la / den, 0.0, 1.0);
  };
  for (std::size_t a = 0; a + 1 < nx; ++a) {
    for (std::size_t b = 0; b + 1 < nw; ++b) {
      // Corners: 0 (a, b), 1 (a+1, b), 2 (a+1, b+1), 3 (a, b+1).
      const double v0 = l[a * nw + b], v1 = l[(a + 1) * nw + b];
      const double v2 = l[(a + 1) * nw + b + 1], v3 = l[a * nw + b + 1];
      const bool s0 = v0 >= 0, s1 = v1 >= 0, s2 = v2 >= 0, s3 = v3 >= 0;
      if (s0 == s1 && s1 == s2 && s2 == s3) continue;
      Crossing e[4];
      bool has[4] = {s0 != s1, s1 != s2, s2 != s3, s3 != s0};
      if (has[0]) e[0] = {cut(v0, v1), 0.0};
      if (has[1]) e[1] = {1.0, cut(v1, v2)};
      if (has[2]) e[2] = {1.0 - cut(v2, v3), 1.0};
      if (has[3]) e[3] = {0.0, 1.0 - cut(v3, v0)};
      const int n = has[0] + has[1] + has[2] + has[3];
      if (n == 2) {
        int i = 0;
        while (!has[i]) ++i;
        int j = i + 1;
        while (!has[j]) ++j;
        fn(a, b, e[i], e[j]);
      } else {
        const bool centre = 0.25 * (v0 + v1 + v2 + v3) >= 0;
        if (centre == s0) {
          fn(a, b, e[0], e[1]);
          fn(a, b, e[2], e[3]);
        } else {
          fn(a, b, e[3], e[0]);
          fn(a, b, e[1], e[2]);
        }
      }
    }
  }
}

}  // namespace

double Segment::length() const { return std::hypot(x1 - x0, w1 - w0); }

DomainMask::DomainMask(TFGrid g, std::vector<std::uint8_t> in) : grid(std::move(g)), inside(std::move(in)) {
  if (inside.size() != grid.size()) throw Error("mask: size does not match grid");
  level.resize(inside.size());
  for (std::size_t k = 0; k < inside.size(); ++k) {
    inside[k] = inside[k] ? 1 : 0;
    level[k] = inside[k] ? 0.5 : -0.5;
  }
}

DomainMask DomainMask::from_level(TFGrid g, std::vector<double> level) {
  if (level.size() != g.size()) throw Error("mask: size does not match grid");
  DomainMask m;
  m.grid = std::move(g);
  m.inside = classify(level);
  m.level = std::move(level);
  return m;
}

DomainMask DomainMask::full(const TFGrid& g) { return DomainMask(g, std::vector<std::uint8_t>(g.size(), 1)); }

DomainMask DomainMask::disk(const TFGrid& g, double x, double w, double radius) {
  return level_mask(g, [&](double px, double pw) { return radius - std::hypot(px - x, pw - w); });
}

DomainMask DomainMask::half_plane(const TFGrid& g, double angle, double offset) {
  const double c = std::cos(angle), s = std::sin(angle);
  return level_mask(g, [&](double px, double pw) { return px * c + pw * s - offset; });
}

DomainMask DomainMask::rect(const TFGrid& g, double x0, double x1, double w0, double w1) {
  return level_mask(g, [&](double px, double pw) {
    return std::min(std::min(px - x0, x1 - px), std::min(pw - w0, w1 - pw));
  });
}

std::size_t DomainMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

DomainMask DomainMask::operator&(const DomainMask& o) const {
  same_grid(*this, o);
  std::vector<double> l(level.size());
  for (std::size_t k = 0; k < l.size(); ++k) l[k] = std::min(level[k], o.level[k]);
  return from_level(grid, std::move(l));
}

DomainMask DomainMask::operator|(const DomainMask& o) const {
  same_grid(*this, o);
  std::vector<double> l(level.size());
  for (std::size_t k = 0; k < l.size(); ++k) l[k] = std::max(level[k], o.level[k]);
  return from_level(grid, std::move(l));
}

DomainMask DomainMask::minus(const DomainMask& o) const {
  same_grid(*this, o);
  std::vector<double> l(level.size());
  // -0.0 would count as inside; nudge the shared zero level out.
  for (std::size_t k = 0; k < l.size(); ++k) {
    const double other = o.level[k] >= 0.0 ? std::min(-o.level[k], -1e-300) : -o.level[k];
    l[k] = std::min(level[k], other);
  }
  return from_level(grid, std::move(l));
}

std::vector<Segment> DomainMask::boundary() const {
  std::vector<Segment> out;
  const double dx = grid.x.spacing(), dw = grid.omega.spacing();
  for_each_segment(*this, [&](std::size_t a, std::size_t b, Crossing p, Crossing q) {
    const double x = grid.x.point(a), w = grid.omega.point(b);
    out.push_back({x + p.u * dx, w + p.v * dw, x + q.u * dx, w + q.v * dw});
  });
  return out;
}

double DomainMask::boundary_length() const {
  double total = 0.0;
  for (const auto& s : boundary()) total += s.length();
  return total;
}

std::vector<double> weight_values(const TFField& w, const char* what) {
  std::vector<double> out(w.values.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const cplx v = w.values[k];
    if (v.imag() != 0.0 || !(v.real() >= 0.0)) throw Error(std::string(what) + ": weight must be real and nonnegative");
    out[k] = v.real();
  }
  return out;
}

double mask_mass(const std::vector<double>& w, const DomainMask& mask) {
  // Samples exactly on the zero level are shared with the complement.
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (mask.inside[k]) acc += mask.level[k] == 0.0 ? 0.5 * w[k] : w[k];
  }
  return acc * mask.grid.cell_area();
}

double boundary_integral(const std::vector<double>& w, const DomainMask& mask) {
  const std::size_t nw = mask.grid.omega.count();
  const double dx = mask.grid.x.spacing(), dw = mask.grid.omega.spacing();
  double acc = 0.0;
  for_each_segment(mask, [&](std::size_t a, std::size_t b, Crossing p, Crossing q) {
    const double u = 0.5 * (p.u + q.u), v = 0.5 * (p.v + q.v);
    const double val = (1 - u) * (1 - v) * w[a * nw + b] + u * (1 - v) * w[(a + 1) * nw + b] +
                       u * v * w[(a + 1) * nw + b + 1] + (1 - u) * v * w[a * nw + b + 1];
    acc += val * std::hypot((q.u - p.u) * dx, (q.v - p.v) * dw);
  });
  return acc;
}

}  // namespace stftlab
