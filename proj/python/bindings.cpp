#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stftlab/experiments.hpp"
#include "stftlab/forge.hpp"
#include "stftlab/geometry.hpp"
#include "stftlab/norms.hpp"
#include "stftlab/transforms.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace stftlab;
namespace ex = stftlab::experiments;

namespace {

using carray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using darray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Signal to_signal(const carray& a, double length) {
  if (a.ndim() != 1) throw py::value_error("expected a 1D array");
  const auto g = make_grid(length, static_cast<std::size_t>(a.shape(0)));
  return Signal(g, std::vector<cplx>(a.data(), a.data() + a.size()));
}

carray from_signal(const Signal& f) {
  carray out(static_cast<py::ssize_t>(f.size()));
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

TFGrid tf_grid(py::ssize_t nx, py::ssize_t nw, double lx, double lw) {
  return {make_grid(lx, static_cast<std::size_t>(nx)), make_grid(lw, static_cast<std::size_t>(nw))};
}

TFField to_field(const carray& a, double lx, double lw) {
  if (a.ndim() != 2) throw py::value_error("expected a 2D array (x, omega)");
  return TFField(tf_grid(a.shape(0), a.shape(1), lx, lw), std::vector<cplx>(a.data(), a.data() + a.size()));
}

carray from_field(const TFField& f) {
  carray out({static_cast<py::ssize_t>(f.nx()), static_cast<py::ssize_t>(f.nw())});
  std::copy(f.values.begin(), f.values.end(), out.mutable_data());
  return out;
}

WindowSpec window_of(const std::string& name) {
  if (name == "gaussian") return WindowSpec::gaussian();
  if (name.rfind("hermite", 0) == 0 && name.size() > 7) return WindowSpec::hermite(std::stoi(name.substr(7)));
  throw py::value_error("window must be 'gaussian' or 'hermite<n>'");
}

DistanceNorm norm_of(const std::string& kind, double s, double p, double r, double q) {
  const NormSpec spec{.s = s, .p = p, .r = r, .q = q};
  if (kind == "l2") return DistanceNorm::lq(2.0);
  if (kind == "lq") return DistanceNorm::lq(q);
  if (kind == "sobolev") return DistanceNorm::sobolev(spec);
  if (kind == "sobolev-lq") return DistanceNorm::sobolev_lq(spec);
  throw py::value_error("norm must be l2, lq, sobolev or sobolev-lq");
}

std::vector<double> axis(const Grid1D& g) { return g.points(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "STFT phase-retrieval laboratory";
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("grid_points", [](double L, std::size_t N) { return make_grid(L, N).points(); }, "L"_a, "N"_a);

  m.def("gaussian", [](double L, std::size_t N, double center, double modulation) {
    return from_signal(gaussian(make_grid(L, N), center, modulation));
  }, "L"_a, "N"_a, "center"_a = 0.0, "modulation"_a = 0.0);

  m.def("hermite", [](double L, std::size_t N, int n) { return from_signal(hermite(make_grid(L, N), n)); },
        "L"_a, "N"_a, "n"_a);

  m.def("fixture", [](const std::string& name, double L, std::size_t N, std::uint64_t seed) {
    return from_signal(ex::fixture(name, make_grid(L, N), seed));
  }, "name"_a, "L"_a, "N"_a, "seed"_a = 1);

  m.def("stft", [](const carray& f, double L, const std::string& window, const std::string& grid, double x_extent,
                   std::size_t x_count) {
    const auto s = to_signal(f, L);
    TFGrid tf;
    if (grid == "full") tf = full_stft_grid(s.grid);
    else if (grid == "self-dual") tf = self_dual_grid(s.grid);
    else if (grid == "window") tf = stft_grid(s.grid, x_extent, x_count);
    else throw py::value_error("grid must be full, self-dual or window");
    const auto v = stft(s, window_of(window), tf);
    return py::make_tuple(from_field(v), axis(tf.x), axis(tf.omega), tf.x.length(), tf.omega.length());
  }, "f"_a, "L"_a, "window"_a = "gaussian", "grid"_a = "full", "x_extent"_a = 0.0, "x_count"_a = 0,
     "Returns (V, x, omega, Lx, Lw) with V indexed [x, omega].");

  m.def("phaseless", [](const carray& f, double L, const std::string& window) {
    const auto s = to_signal(f, L);
    return from_field(phaseless(s, window_of(window), self_dual_grid(s.grid)));
  }, "f"_a, "L"_a, "window"_a = "gaussian", "|V f|^2 on the self-dual grid.");

  m.def("ambiguity_relation_residual", [](const carray& f, double L, const std::string& window) {
    return ambiguity_relation_residual(to_signal(f, L), window_of(window));
  }, "f"_a, "L"_a, "window"_a = "gaussian");

  m.def("recover", [](const carray& measurement, double L, const std::string& window, double tau) {
    const auto n = static_cast<std::size_t>(measurement.shape(0));
    const auto g = make_grid(L, n);
    const auto tf = self_dual_grid(g);
    const auto r = recover(to_field(measurement, tf.x.length(), tf.omega.length()), g, window_of(window), tau);
    return py::dict("signal"_a = from_signal(r.signal), "masked_fraction"_a = r.masked_fraction, "tau"_a = r.tau);
  }, "measurement"_a, "L"_a, "window"_a = "gaussian", "tau"_a = 0.0);

  m.def("phase_distance", [](const carray& f, const carray& g, double L, const std::string& norm, double s,
                             double p, double r, double q) {
    const auto res = phase_inf_distance(to_signal(f, L), to_signal(g, L), norm_of(norm, s, p, r, q));
    return py::make_tuple(res.distance, res.lambda);
  }, "f"_a, "g"_a, "L"_a, "norm"_a = "l2", "s"_a = 1.0, "p"_a = 2.0, "r"_a = 0.0, "q"_a = 2.0,
     "inf over |lambda| = 1 of ||lambda f - g||; returns (distance, lambda).");

  m.def("sobolev_norm", [](const carray& f, double L, double s, double p, double r) {
    return frac_sobolev_norm(to_signal(f, L), NormSpec{.s = s, .p = p, .r = r});
  }, "f"_a, "L"_a, "s"_a, "p"_a = 2.0, "r"_a = 0.0);

  m.def("modulus_ratio", [](const carray& F, double Lx, double Lw, double s, double p) {
    return modulus_sobolev_ratio(to_field(F, Lx, Lw), NormSpec{.s = s, .p = p});
  }, "F"_a, "Lx"_a, "Lw"_a, "s"_a, "p"_a = 2.0);

  m.def("cheeger", [](const darray& w, double Lx, double Lw, std::size_t thresholds, std::size_t directions,
                      std::size_t offsets) {
    carray c(w);
    CheegerOptions opt;
    opt.thresholds = thresholds;
    opt.directions = directions;
    opt.offsets = offsets;
    const auto rep = cheeger_estimate(to_field(c, Lx, Lw), opt);
    return py::dict("h"_a = rep.h, "family"_a = rep.family, "total_mass"_a = rep.total_mass);
  }, "weight"_a, "Lx"_a, "Lw"_a, "thresholds"_a = 256, "directions"_a = 64, "offsets"_a = 65);

  m.def("poincare", [](py::array_t<bool, py::array::c_style | py::array::forcecast> mask, double Lx, double Lw,
                       std::optional<darray> weight) {
    if (mask.ndim() != 2) throw py::value_error("mask must be 2D");
    const auto tf = tf_grid(mask.shape(0), mask.shape(1), Lx, Lw);
    std::vector<std::uint8_t> in(mask.data(), mask.data() + mask.size());
    TFField w(tf);
    if (weight) {
      w = to_field(carray(*weight), Lx, Lw);
    } else {
      for (auto& v : w.values) v = 1.0;
    }
    const auto rep = poincare_constant(DomainMask(tf, in), w);
    return py::dict("mu1"_a = rep.mu1, "constant"_a = rep.constant, "connected"_a = rep.connected,
                    "status"_a = rep.status);
  }, "mask"_a, "Lx"_a, "Lw"_a, "weight"_a = py::none());

  m.def("gluing_bound", &gluing_bound, "c_a"_a, "c_b"_a, "lam"_a);

  m.def("instability_ratios", [](double L, std::size_t N, double sigma, double p, double q, int n_max,
                                 double delta) {
    const auto sched = select_annulus_schedule(gaussian(make_grid(L, N)), sigma, p, q, n_max);
    const auto bumps = build_bumps(sched);
    py::list rows;
    for (int n = 1; n <= n_max; ++n) {
      const auto r = instability_ratio(assemble_pair(sched, bumps, delta, n), sched);
      rows.append(py::dict("n"_a = n, "j"_a = sched.radii[n - 1], "ratio"_a = r.ratio, "status"_a = r.status));
    }
    return rows;
  }, "L"_a = 512.0, "N"_a = 4096, "sigma"_a = 0.0, "p"_a = 2.0, "q"_a = 2.0, "n_max"_a = 5, "delta"_a = 0.1);

  m.def("experiments", [] {
    std::vector<std::string> ids;
    for (const auto& info : ex::catalog()) ids.push_back(info.id);
    return ids;
  });

  m.def("run_experiment", [](const std::string& id, const std::string& config, const std::string& out) {
    const auto manifest = ex::manifest_from_json(id, config.empty() ? ex::json::object() : ex::json::parse(config));
    ex::ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = ex::run(manifest);
    }
    if (!out.empty()) ex::write_outputs(r, out);
    py::list asserts;
    for (const auto& a : r.assertions) {
      asserts.append(py::dict("id"_a = a.rule.id, "invariant"_a = a.rule.invariant, "passed"_a = a.passed,
                              "gate"_a = a.rule.gate, "detail"_a = a.detail));
    }
    py::dict tables;
    for (const auto& t : r.tables) tables[py::str(t.name)] = t.to_csv();
    return py::dict("id"_a = r.id, "passed"_a = r.passed(), "assertions"_a = asserts, "tables"_a = tables,
                    "summary"_a = r.summary.dump(), "seconds"_a = r.seconds);
  }, "id"_a, "config"_a = "", "out"_a = "",
     "config is a JSON string {\"seed\": ..., \"params\": {...}}; summary comes back as JSON text.");
}
