#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stftlab/experiments.hpp"
#include "stftlab/forge.hpp"
#include "stftlab/geometry.hpp"
#include "stftlab/io.hpp"
#include "stftlab/norms.hpp"
#include "stftlab/parallel.hpp"
#include "stftlab/transforms.hpp"

using namespace stftlab;
namespace ex = stftlab::experiments;
using json = ex::json;

namespace {

// Thrown for bad arguments that CLI11 cannot see (file contents, names).
struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

WindowSpec parse_window(const std::string& name) {
  if (name == "gaussian") return WindowSpec::gaussian();
  if (name.rfind("hermite", 0) == 0 && name.size() > 7 &&
      name.find_first_not_of("0123456789", 7) == std::string::npos) {
    return WindowSpec::hermite(std::stoi(name.substr(7)));
  }
  throw Usage("--window: expected gaussian or hermite<n>, got " + name);
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string format_of(const std::string& out, const std::string& requested) {
  if (!requested.empty()) return requested;
  if (out.size() > 4 && out.substr(out.size() - 4) == ".csv") return "csv";
  if (out.size() > 5 && out.substr(out.size() - 5) == ".json") return "json";
  return "bin";
}

json signal_json(const Signal& f) {
  json j;
  j["L"] = f.grid.length();
  j["N"] = f.grid.count();
  json re = json::array(), im = json::array();
  for (const auto& v : f.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

void write_signal(const Signal& f, const std::string& out, const std::string& format) {
  const std::string fmt = format_of(out, format);
  if (fmt == "bin") {
    if (out.empty()) throw Usage("--out is required for binary output");
    io::save(out, f);
    return;
  }
  std::ostringstream text;
  if (fmt == "csv") {
    io::write_signal_csv(text, f);
  } else if (fmt == "json") {
    text << signal_json(f).dump() << '\n';
  } else {
    throw Usage("--format: expected csv, json or bin");
  }
  if (out.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream(out, std::ios::binary) << text.str();
  }
}

TFField load_any_field(const std::string& path) {
  auto c = io::load(path);
  if (auto* f = std::get_if<TFField>(&c)) return *f;
  throw Usage(path + ": expected a TF field");
}

DomainMask load_mask(const std::string& path) {
  auto c = io::load(path);
  if (auto* m = std::get_if<io::MaskBlob>(&c)) return DomainMask(m->grid, m->inside);
  throw Usage(path + ": expected a mask");
}

struct NormArgs {
  std::string kind = "l2";
  double s = 1.0, p = 2.0, r = 0.0, q = 2.0;

  void add(CLI::App* app) {
    app->add_option("--norm", kind, "l2, lq, sobolev or sobolev-lq")->capture_default_str();
    app->add_option("--s", s, "smoothness")->capture_default_str();
    app->add_option("--p", p, "integrability")->capture_default_str();
    app->add_option("--r", r, "weight power")->capture_default_str();
    app->add_option("--q", q, "L^q exponent")->capture_default_str();
  }

  DistanceNorm norm() const {
    const NormSpec spec{.s = s, .p = p, .r = r, .q = q};
    if (kind == "l2") return DistanceNorm::lq(2.0);
    if (kind == "lq") return DistanceNorm::lq(q);
    if (kind == "sobolev") return DistanceNorm::sobolev(spec);
    if (kind == "sobolev-lq") return DistanceNorm::sobolev_lq(spec);
    throw Usage("--norm: expected l2, lq, sobolev or sobolev-lq, got " + kind);
  }

  json params() const { return {{"s", s}, {"p", p}, {"r", r}, {"q", q}}; }
};

int print_assertions(const std::vector<ex::Assertion>& asserts) {
  int failed = 0;
  for (const auto& a : asserts) {
    const char* tag = a.passed ? "PASS" : (a.rule.gate ? "FAIL" : "NOTE");
    if (!a.passed && a.rule.gate) ++failed;
    std::cout << tag << ' ' << a.rule.id << " [" << a.rule.invariant << "] " << a.detail << '\n';
  }
  return failed;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("STFTLAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*env == '\0' || *end != '\0' || n < 1) {
      std::cerr << "STFTLAB_THREADS must be a positive integer, got '" << env << "'\n";
      return 2;
    }
    set_max_threads(static_cast<std::size_t>(n));
  }

  CLI::App app{"stftlab: STFT phase-retrieval laboratory"};
  app.require_subcommand(1);
  int status = 0;

  // gen
  auto* gen = app.add_subcommand("gen", "generate a fixture signal");
  std::string gen_name, gen_out, gen_format;
  double gen_L = 32, gen_center = 0, gen_mod = 0;
  std::size_t gen_N = 512;
  std::uint64_t gen_seed = 1;
  gen->add_option("fixture", gen_name, "gaussian, hermite<n>, two-bumps, random")->required();
  gen->add_option("--L", gen_L, "window length")->capture_default_str();
  gen->add_option("--N", gen_N, "sample count (power of two)")->capture_default_str();
  gen->add_option("--seed", gen_seed, "seed for random fixtures")->capture_default_str();
  gen->add_option("--center", gen_center, "gaussian centre");
  gen->add_option("--modulation", gen_mod, "gaussian modulation");
  gen->add_option("--out", gen_out, "output file (stdout for csv/json)");
  gen->add_option("--format", gen_format, "csv, json or bin")->check(CLI::IsMember({"csv", "json", "bin"}));
  gen->callback([&] {
    const auto g = make_grid(gen_L, gen_N);
    const Signal f = gen_name == "gaussian" ? gaussian(g, gen_center, gen_mod) : ex::fixture(gen_name, g, gen_seed);
    write_signal(f, gen_out, gen_format);
  });

  // stft
  auto* st = app.add_subcommand("stft", "STFT of a stored signal");
  std::string st_in, st_out, st_window = "gaussian", st_grid = "full";
  double st_extent = 0;
  std::size_t st_count = 0;
  bool st_modulus = false;
  st->add_option("signal", st_in, "signal file")->required()->check(CLI::ExistingFile);
  st->add_option("--window", st_window, "gaussian or hermite<n>")->capture_default_str();
  st->add_option("--grid", st_grid, "full, self-dual or window")->capture_default_str()
      ->check(CLI::IsMember({"full", "self-dual", "window"}));
  st->add_option("--x-extent", st_extent, "x extent for --grid window");
  st->add_option("--x-count", st_count, "x samples for --grid window");
  st->add_flag("--modulus", st_modulus, "store |V f| instead of V f");
  st->add_option("--out", st_out, "output field file")->required();
  st->callback([&] {
    const auto f = io::load_signal(st_in);
    TFGrid tf;
    if (st_grid == "full") {
      tf = full_stft_grid(f.grid);
    } else if (st_grid == "self-dual") {
      tf = self_dual_grid(f.grid);
    } else {
      if (st_extent <= 0 || st_count == 0) throw Usage("--grid window needs --x-extent and --x-count");
      tf = stft_grid(f.grid, st_extent, st_count);
    }
    auto v = stft(f, parse_window(st_window), tf);
    if (st_modulus) v = modulus(v);
    io::save(st_out, v);
    emit({{"nx", tf.x.count()}, {"nw", tf.omega.count()}, {"l2", l2_norm(v)}});
  });

  // norm
  auto* nm = app.add_subcommand("norm", "norm of a stored signal or field");
  std::string nm_in;
  NormArgs nm_args;
  nm->add_option("file", nm_in, "signal or field file")->required()->check(CLI::ExistingFile);
  nm_args.add(nm);
  nm->callback([&] {
    const auto norm = nm_args.norm();
    const auto c = io::load(nm_in);
    double value = 0.0;
    if (auto* f = std::get_if<Signal>(&c)) {
      value = norm(*f);
    } else if (auto* F = std::get_if<TFField>(&c)) {
      value = norm(*F);
    } else {
      throw Usage(nm_in + ": masks have no norm");
    }
    emit({{"norm", norm.name()}, {"params", nm_args.params()}, {"value", value}});
  });

  // distance
  auto* ds = app.add_subcommand("distance", "inf over unit lambda of ||lambda f - g||");
  std::string ds_f, ds_g;
  NormArgs ds_args;
  ds->add_option("f", ds_f, "first file")->required()->check(CLI::ExistingFile);
  ds->add_option("g", ds_g, "second file")->required()->check(CLI::ExistingFile);
  ds_args.add(ds);
  ds->callback([&] {
    const auto norm = ds_args.norm();
    const auto a = io::load(ds_f), b = io::load(ds_g);
    PhaseDistanceResult r;
    if (std::holds_alternative<Signal>(a) && std::holds_alternative<Signal>(b)) {
      r = phase_inf_distance(std::get<Signal>(a), std::get<Signal>(b), norm);
    } else if (std::holds_alternative<TFField>(a) && std::holds_alternative<TFField>(b)) {
      r = phase_inf_distance(std::get<TFField>(a), std::get<TFField>(b), norm);
    } else {
      throw Usage("distance: both files must be signals or both fields");
    }
    emit({{"distance", r.distance}, {"lambda", complex_json(r.lambda)}, {"method", r.method},
          {"degenerate", r.degenerate}, {"norm", norm.name()}});
  });

  // instability
  auto* in = app.add_subcommand("instability", "annulus schedule, lemma bounds and ratios");
  double in_L = 512, in_sigma = 0, in_p = 2, in_q = 2, in_delta = 0.1;
  std::size_t in_N = 4096;
  int in_nmax = 5;
  std::string in_seed = "gaussian", in_config;
  in->add_option("--seed-fixture", in_seed, "seed profile h")->capture_default_str();
  in->add_option("--L", in_L)->capture_default_str();
  in->add_option("--N", in_N)->capture_default_str();
  in->add_option("--sigma", in_sigma)->capture_default_str();
  in->add_option("--p", in_p)->capture_default_str();
  in->add_option("--q", in_q)->capture_default_str();
  in->add_option("--delta", in_delta)->capture_default_str();
  in->add_option("--n-max", in_nmax)->capture_default_str();
  in->add_option("--config", in_config, "JSON manifest with the same keys")->check(CLI::ExistingFile);
  in->callback([&] {
    if (!in_config.empty()) {
      std::ifstream file(in_config);
      json cfg;
      try {
        cfg = json::parse(file);
      } catch (const json::exception& e) {
        throw Usage(in_config + ": " + e.what());
      }
      for (const auto& [k, v] : cfg.items()) {
        if (k == "seed") in_seed = v.get<std::string>();
        else if (k == "L") in_L = v.get<double>();
        else if (k == "N") in_N = v.get<std::size_t>();
        else if (k == "sigma") in_sigma = v.get<double>();
        else if (k == "p") in_p = v.get<double>();
        else if (k == "q") in_q = v.get<double>();
        else if (k == "delta") in_delta = v.get<double>();
        else if (k == "n_max") in_nmax = v.get<int>();
        else throw Usage("config: unknown key " + k);
      }
    }
    const auto g = make_grid(in_L, in_N);
    const auto sched = select_annulus_schedule(ex::fixture(in_seed, g), in_sigma, in_p, in_q, in_nmax);
    const auto bumps = build_bumps(sched);
    const auto rows = verify_lemma_bounds(sched, bumps);
    std::cout << "n,j,gub_x,gub_lp,mcb,mtb,sob,ratio,status\n";
    for (const auto& r : rows) {
      const auto ratio = instability_ratio(assemble_pair(sched, bumps, in_delta, r.n), sched);
      std::cout << r.n << ',' << io::format_double(r.j) << ',' << io::format_double(r.gub_x) << ','
                << io::format_double(r.gub_lp) << ',' << io::format_double(r.mcb) << ','
                << io::format_double(r.mtb) << ',' << io::format_double(r.sob) << ','
                << io::format_double(ratio.ratio) << ',' << ratio.status << '\n';
    }
  });

  // cheeger
  auto* ch = app.add_subcommand("cheeger", "Cheeger upper bound of a nonnegative field");
  std::string ch_in, ch_table, ch_witness;
  bool ch_modulus = false;
  CheegerOptions ch_opt;
  ch->add_option("field", ch_in, "field file")->required()->check(CLI::ExistingFile);
  ch->add_flag("--modulus", ch_modulus, "take |F| first");
  ch->add_option("--thresholds", ch_opt.thresholds)->capture_default_str();
  ch->add_option("--directions", ch_opt.directions)->capture_default_str();
  ch->add_option("--offsets", ch_opt.offsets)->capture_default_str();
  ch->add_option("--table", ch_table, "write the candidate table as CSV");
  ch->add_option("--witness", ch_witness, "write the minimizing domain as a mask");
  ch->callback([&] {
    auto w = load_any_field(ch_in);
    if (ch_modulus) w = modulus(w);
    const auto rep = cheeger_estimate(w, ch_opt);
    if (!ch_table.empty()) {
      std::ofstream out(ch_table);
      out << "family,index,a,b,c,mass,boundary,value,admissible\n";
      for (const auto& cd : rep.table) {
        out << cd.family << ',' << cd.index << ',' << io::format_double(cd.a) << ',' << io::format_double(cd.b)
            << ',' << io::format_double(cd.c) << ',' << io::format_double(cd.mass) << ','
            << io::format_double(cd.boundary) << ',' << io::format_double(cd.value) << ',' << cd.admissible << '\n';
      }
    }
    if (!ch_witness.empty()) io::save(ch_witness, io::MaskBlob{rep.witness.grid, rep.witness.inside});
    emit({{"h", rep.h}, {"family", rep.family}, {"total_mass", rep.total_mass}, {"candidates", rep.table.size()}});
  });

  // poincare
  auto* pc = app.add_subcommand("poincare", "Poincare constant of a mask");
  std::string pc_mask, pc_weight;
  bool pc_gauss = false;
  pc->add_option("mask", pc_mask, "mask file")->required()->check(CLI::ExistingFile);
  pc->add_option("--weight", pc_weight, "weight field (default 1)")->check(CLI::ExistingFile);
  pc->add_flag("--gaussian-measure", pc_gauss, "multiply the weight by exp(-pi |z|^2)");
  pc->callback([&] {
    const auto mask = load_mask(pc_mask);
    TFField w(mask.grid);
    if (pc_weight.empty()) {
      for (auto& v : w.values) v = 1.0;
    } else {
      w = load_any_field(pc_weight);
    }
    PoincareOptions opt;
    opt.gaussian_measure = pc_gauss;
    const auto rep = poincare_constant(mask, w, opt);
    emit({{"mu1", rep.mu1}, {"constant", rep.constant}, {"connected", rep.connected},
          {"components", rep.components}, {"iterations", rep.iterations}, {"status", rep.status}});
  });

  // glue
  auto* gl = app.add_subcommand("glue", "gluing bound from constants, or connectivity from masks");
  double gl_ca = 0, gl_cb = 0, gl_lambda = 0;
  std::string gl_w, gl_a, gl_b;
  gl->add_option("--c-a", gl_ca, "constant on A")->required();
  gl->add_option("--c-b", gl_cb, "constant on B")->required();
  auto* lam = gl->add_option("--lambda", gl_lambda, "connectivity");
  auto* wopt = gl->add_option("--weight", gl_w, "field |G f| for connectivity")->check(CLI::ExistingFile);
  gl->add_option("--a", gl_a, "mask A")->check(CLI::ExistingFile)->needs(wopt);
  gl->add_option("--b", gl_b, "mask B")->check(CLI::ExistingFile)->needs(wopt);
  lam->excludes(wopt);
  gl->callback([&] {
    double lambda = gl_lambda;
    if (!gl_w.empty()) {
      if (gl_a.empty() || gl_b.empty()) throw Usage("--weight needs --a and --b");
      lambda = connectivity(load_any_field(gl_w), load_mask(gl_a), load_mask(gl_b));
    } else if (lam->count() == 0) {
      throw Usage("glue: give --lambda or --weight with --a and --b");
    }
    emit({{"lambda", lambda}, {"c_a", gl_ca}, {"c_b", gl_cb}, {"bound", gluing_bound(gl_ca, gl_cb, lambda)}});
  });

  // recover
  auto* rc = app.add_subcommand("recover", "ambiguity inversion of a phaseless measurement");
  std::string rc_in, rc_out, rc_ref, rc_window = "gaussian";
  double rc_L = 16, rc_tau = 0;
  std::size_t rc_N = 256;
  rc->add_option("measurement", rc_in, "|V f|^2 on the self-dual grid")->required()->check(CLI::ExistingFile);
  rc->add_option("--L", rc_L)->capture_default_str();
  rc->add_option("--N", rc_N)->capture_default_str();
  rc->add_option("--window", rc_window)->capture_default_str();
  rc->add_option("--tau", rc_tau, "mask threshold (0: 1e-6 A phi(0,0))");
  rc->add_option("--reference", rc_ref, "true signal, for the error")->check(CLI::ExistingFile);
  rc->add_option("--out", rc_out, "recovered signal file");
  rc->callback([&] {
    const auto r = recover(load_any_field(rc_in), make_grid(rc_L, rc_N), parse_window(rc_window), rc_tau);
    json j{{"masked_fraction", r.masked_fraction}, {"tau", r.tau}};
    if (!rc_ref.empty()) {
      const auto f = io::load_signal(rc_ref);
      j["error"] = phase_inf_distance(r.signal, f, DistanceNorm::lq(2.0)).distance / l2_norm(f);
    }
    if (!rc_out.empty()) io::save(rc_out, r.signal);
    emit(j);
  });

  // run / list / verify
  auto* rn = app.add_subcommand("run", "run a named experiment");
  std::string rn_id, rn_config, rn_out;
  rn->add_option("id", rn_id, "experiment id")->required();
  rn->add_option("--config", rn_config, "JSON {seed, params}")->check(CLI::ExistingFile);
  rn->add_option("--out", rn_out, "output directory (default out/<id>)");
  rn->callback([&] {
    json cfg = json::object();
    if (!rn_config.empty()) {
      std::ifstream file(rn_config);
      try {
        cfg = json::parse(file);
      } catch (const json::exception& e) {
        throw Usage(rn_config + ": " + e.what());
      }
    }
    ex::Manifest m;
    try {
      ex::find_experiment(rn_id);
      m = ex::manifest_from_json(rn_id, cfg);
    } catch (const Error& e) {
      throw Usage(e.what());
    }
    const auto result = ex::run(m);
    ex::write_outputs(result, rn_out.empty() ? std::filesystem::path("out") / rn_id : std::filesystem::path(rn_out));
    for (const auto& t : result.tables) std::cout << "# " << t.name << '\n' << t.to_csv();
    const int failed = print_assertions(result.assertions);
    std::cerr << rn_id << ": " << result.seconds << " s (budget " << result.budget_seconds << " s)\n";
    status = failed ? 1 : 0;
  });

  auto* ls = app.add_subcommand("list", "list experiment ids");
  ls->callback([&] {
    for (const auto& info : ex::catalog()) std::cout << info.id << '\t' << info.description << '\n';
  });

  auto* vf = app.add_subcommand("verify", "re-check assertions from stored tables");
  std::string vf_dir;
  vf->add_option("dir", vf_dir, "experiment output directory")->required()->check(CLI::ExistingDirectory);
  vf->callback([&] {
    const auto rep = ex::verify(vf_dir);
    const int failed = print_assertions(rep.assertions);
    for (const auto& m : rep.mismatches) std::cerr << "mismatch: " << m << '\n';
    status = failed || !rep.consistent() ? 1 : 0;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e, std::cerr, std::cerr);
    return 2;
  } catch (const Usage& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
