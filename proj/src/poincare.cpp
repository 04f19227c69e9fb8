#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <numbers>

#include "stftlab/geometry.hpp"
#include "stftlab/rng.hpp"

namespace stftlab {

PoincareReport poincare_constant(const DomainMask& omega, const TFField& weight, const PoincareOptions& opt) {
  if (!(omega.grid == weight.grid)) throw Error("poincare: grids differ");
  const auto wv = weight_values(weight, "poincare");
  const TFGrid& g = omega.grid;
  const std::size_t nx = g.x.count(), nw = g.omega.count();

  PoincareReport rep;
  rep.components = component_count(omega);
  if (rep.components == 0) throw Error("poincare: empty domain");
  if (rep.components > 1) {
    rep.connected = false;
    rep.mu1 = 0.0;
    rep.constant = std::numeric_limits<double>::infinity();
    rep.status = "disconnected";
    return rep;
  }

  std::vector<std::ptrdiff_t> node(g.size(), -1);
  std::vector<double> mass;
  double x_lo = 1e300, x_hi = -1e300, w_lo = 1e300, w_hi = -1e300;
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < nw; ++b) {
      const std::size_t k = a * nw + b;
      if (!omega.inside[k]) continue;
      const double x = g.x.point(a), y = g.omega.point(b);
      double m = wv[k] * (opt.gaussian_measure ? std::exp(-std::numbers::pi * (x * x + y * y)) : 1.0);
      if (m < opt.clip) {
        m = opt.clip;
        ++rep.clipped;
      }
      node[k] = static_cast<std::ptrdiff_t>(mass.size());
      mass.push_back(m * g.cell_area());
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      w_lo = std::min(w_lo, y);
      w_hi = std::max(w_hi, y);
    }
  }
  const auto n = static_cast<Eigen::Index>(mass.size());
  if (n < 2) throw Error("poincare: domain needs at least two points");

  std::vector<Eigen::Triplet<double>> trips;
  auto couple = [&](std::size_t k1, std::size_t k2, double h) {
    const auto i = node[k1], j = node[k2];
    if (i < 0 || j < 0) return;
    const double c = 0.5 * (mass[i] + mass[j]) / (h * h);
    trips.emplace_back(i, i, c);
    trips.emplace_back(j, j, c);
    trips.emplace_back(i, j, -c);
    trips.emplace_back(j, i, -c);
  };
  for (std::size_t a = 0; a < nx; ++a) {
    for (std::size_t b = 0; b < nw; ++b) {
      const std::size_t k = a * nw + b;
      if (a + 1 < nx) couple(k, k + nw, g.x.spacing());
      if (b + 1 < nw) couple(k, k + 1, g.omega.spacing());
    }
  }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(trips.begin(), trips.end());
  const Eigen::Map<const Eigen::VectorXd> mvec(mass.data(), n);

  const double diam = std::hypot(x_hi - x_lo + g.x.spacing(), w_hi - w_lo + g.omega.spacing());
  const double shift = 0.1 * std::pow(std::numbers::pi / diam, 2);
  Eigen::SparseMatrix<double> shifted = lap;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * mass[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw Error("poincare: factorization failed");

  const double total = mvec.sum();
  auto deflate = [&](Eigen::MatrixXd& x) {
    const Eigen::RowVectorXd proj = (mvec.transpose() * x) / total;
    x.rowwise() -= proj;
  };

  const auto block = static_cast<Eigen::Index>(std::min<std::size_t>(opt.block, mass.size() - 1));
  SplitMix64 rng(0x5eed);
  Eigen::MatrixXd x(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
  }
  deflate(x);

  double prev = std::numeric_limits<double>::infinity();
  rep.status = "not_converged";
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::MatrixXd y = solver.solve(mvec.asDiagonal() * x);
    deflate(y);
    const Eigen::MatrixXd k = y.transpose() * (lap * y);
    const Eigen::MatrixXd m = y.transpose() * mvec.asDiagonal() * y;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(k, m);
    x = y * ritz.eigenvectors();
    const double theta = ritz.eigenvalues()(0);
    rep.iterations = it;
    rep.mu1 = theta;
    if (std::abs(theta - prev) <= opt.tolerance * std::abs(theta)) {
      rep.status = "ok";
      break;
    }
    prev = theta;
  }
  rep.constant = rep.mu1 > 0.0 ? 1.0 / std::sqrt(rep.mu1) : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace stftlab
