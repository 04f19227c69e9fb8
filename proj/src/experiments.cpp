#include "stftlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "experiment_context.hpp"
#include "stftlab/io.hpp"
#include "stftlab/parallel.hpp"
#include "stftlab/rng.hpp"

namespace stftlab::experiments {

namespace fs = std::filesystem;

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw Error("table " + name + ": row width does not match header");
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& label) const {
  const auto it = std::find(columns.begin(), columns.end(), label);
  if (it == columns.end()) throw Error("table " + name + ": no column " + label);
  return static_cast<std::size_t>(it - columns.begin());
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

std::string Table::to_csv() const {
  std::string text = join(columns) + '\n';
  for (const auto& r : rows) text += join(r) + '\n';
  return text;
}

Table Table::from_csv(const std::string& name, const std::string& text) {
  Table t;
  t.name = name;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("table " + name + ": empty file");
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.add(split(line));
  }
  return t;
}

std::string cell(double v) { return io::format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

double parse_cell(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error("not a number: '" + text + "'");
  }
  if (used != text.size()) throw Error("not a number: '" + text + "'");
  return v;
}

// ---------------------------------------------------------------------------

Assertion evaluate(const Rule& rule, const std::vector<Table>& tables) {
  Assertion a;
  a.rule = rule;
  const auto it = std::find_if(tables.begin(), tables.end(), [&](const Table& t) { return t.name == rule.table; });
  if (it == tables.end()) {
    a.detail = "missing table " + rule.table;
    return a;
  }
  const Table& t = *it;
  const std::size_t col = t.column(rule.column);
  const std::size_t other = rule.other.empty() ? 0 : t.column(rule.other);
  const bool has_where = !rule.where_column.empty();
  const std::size_t where = has_where ? t.column(rule.where_column) : 0;

  std::vector<std::pair<double, double>> vals;
  for (const auto& row : t.rows) {
    if (has_where && row[where] != rule.where_value) continue;
    const double v = parse_cell(row[col]);
    const double o = rule.other.empty() ? rule.value : parse_cell(row[other]);
    if (rule.skip_nonfinite && !std::isfinite(v)) continue;
    vals.emplace_back(v, o);
  }
  a.rows = vals.size();
  if (vals.empty()) {
    a.detail = "no rows selected";
    return a;
  }

  bool ok = true;
  std::size_t bad = 0;
  std::string first;
  auto fail = [&](std::size_t i, double v, double o) {
    if (bad++ == 0) first = "row " + std::to_string(i) + ": " + cell(v) + " vs " + cell(o);
    ok = false;
  };
  const std::string& k = rule.kind;
  if (k == "le" || k == "ge" || k == "abs_le" || k == "rel_le" || k == "true") {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const auto [v, o] = vals[i];
      bool good = false;
      if (k == "le") good = v <= rule.factor * o;
      if (k == "ge") good = v >= rule.factor * o;
      if (k == "abs_le") good = std::abs(v - (rule.other.empty() ? 0.0 : o)) <= rule.value;
      if (k == "rel_le") good = std::abs(v - o) <= rule.value * std::abs(o);
      if (k == "true") good = v != 0.0;
      if (!good) fail(i, v, k == "true" ? 1.0 : o);
    }
  } else if (k == "max_ge") {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& [v, o] : vals) m = std::max(m, v);
    if (!(m >= rule.value)) fail(0, m, rule.value);
    first = first.empty() ? "max " + cell(m) : first;
  } else if (k == "nonincreasing" || k == "increasing") {
    for (std::size_t i = 1; i < vals.size(); ++i) {
      const double prev = vals[i - 1].first, v = vals[i].first;
      const bool good = k == "increasing" ? v > prev : v <= prev;
      if (!good) fail(i, v, prev);
    }
  } else {
    throw Error("unknown rule kind " + k);
  }
  a.passed = ok;
  if (ok) {
    a.detail = first.empty() ? std::to_string(vals.size()) + " rows" : first;
  } else {
    a.detail = std::to_string(bad) + " violation(s); " + first;
  }
  return a;
}

json rule_to_json(const Rule& r) {
  json j;
  j["id"] = r.id;
  j["invariant"] = r.invariant;
  j["table"] = r.table;
  j["kind"] = r.kind;
  j["column"] = r.column;
  j["other"] = r.other;
  j["value"] = cell(r.value);
  j["factor"] = cell(r.factor);
  j["where_column"] = r.where_column;
  j["where_value"] = r.where_value;
  j["skip_nonfinite"] = r.skip_nonfinite;
  j["gate"] = r.gate;
  return j;
}

Rule rule_from_json(const json& j) {
  Rule r;
  r.id = j.at("id").get<std::string>();
  r.invariant = j.at("invariant").get<std::string>();
  r.table = j.at("table").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.column = j.at("column").get<std::string>();
  r.other = j.at("other").get<std::string>();
  r.value = parse_cell(j.at("value").get<std::string>());
  r.factor = parse_cell(j.at("factor").get<std::string>());
  r.where_column = j.at("where_column").get<std::string>();
  r.where_value = j.at("where_value").get<std::string>();
  r.skip_nonfinite = j.at("skip_nonfinite").get<bool>();
  r.gate = j.at("gate").get<bool>();
  return r;
}

// ---------------------------------------------------------------------------

const std::vector<ExperimentInfo>& catalog() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& e : entries()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

const ExperimentInfo& find_experiment(const std::string& id) {
  for (const auto& info : catalog()) {
    if (info.id == id) return info;
  }
  throw Error("unknown experiment id: " + id);
}

namespace {

bool same_kind(const json& a, const json& b) {
  // a is the default. Integer defaults stay integers; float defaults take any number.
  if (a.is_number_integer()) return b.is_number_integer() && !(a.is_number_unsigned() && b.get<double>() < 0);
  if (a.is_number()) return b.is_number();
  if (a.is_array()) {
    if (!b.is_array()) return false;
    if (a.empty()) return true;
    return std::all_of(b.begin(), b.end(), [&](const json& e) { return same_kind(a.front(), e); });
  }
  return a.type() == b.type();
}

}  // namespace

Manifest manifest_from_json(const std::string& id, const json& config) {
  const auto& info = find_experiment(id);
  Manifest m;
  m.id = id;
  if (!config.is_object()) throw Error("config: expected a JSON object");
  for (const auto& [key, value] : config.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) throw Error("config: seed must be a nonnegative integer");
      m.seed = value.get<std::uint64_t>();
    } else if (key == "params") {
      if (!value.is_object()) throw Error("config: params must be an object");
      for (const auto& [pk, pv] : value.items()) {
        if (!info.defaults.contains(pk)) throw Error("config: unknown key params." + pk);
        if (!same_kind(info.defaults.at(pk), pv)) throw Error("config: wrong type for params." + pk);
        m.params[pk] = pv;
      }
    } else {
      throw Error("config: unknown key " + key);
    }
  }
  return m;
}

bool ExperimentResult::passed() const {
  return std::all_of(assertions.begin(), assertions.end(),
                     [](const Assertion& a) { return a.passed || !a.rule.gate; });
}

ExperimentResult run(const Manifest& manifest) {
  const Entry* entry = nullptr;
  for (const auto& e : entries()) {
    if (e.info.id == manifest.id) entry = &e;
  }
  if (!entry) throw Error("unknown experiment id: " + manifest.id);

  ExperimentResult result;
  result.id = manifest.id;
  result.seed = manifest.seed;
  result.budget_seconds = entry->info.budget_seconds;
  Context ctx;
  ctx.params = entry->info.defaults;
  for (const auto& [k, v] : manifest.params.items()) {
    if (!ctx.params.contains(k)) throw Error("config: unknown key params." + k);
    ctx.params[k] = v;
  }
  ctx.seed = manifest.seed;
  ctx.out = &result;
  result.params = ctx.params;

  const auto start = std::chrono::steady_clock::now();
  entry->run(ctx);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& r : ctx.rules) result.assertions.push_back(evaluate(r, result.tables));
  return result;
}

void write_outputs(const ExperimentResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  json summary;
  summary["id"] = result.id;
  summary["seed"] = result.seed;
  summary["params"] = result.params;
  summary["summary"] = result.summary;
  json tables = json::array();
  std::string long_form = "table,row,column,value\n";
  for (const auto& t : result.tables) {
    tables.push_back(t.name);
    write_file(dir / (t.name + ".csv"), t.to_csv());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        long_form += t.name + ',' + std::to_string(r) + ',' + t.columns[c] + ',' + t.rows[r][c] + '\n';
      }
    }
  }
  write_file(dir / (result.id + "_long.csv"), long_form);
  summary["tables"] = tables;
  json asserts = json::array();
  for (const auto& a : result.assertions) {
    json j = rule_to_json(a.rule);
    j["passed"] = a.passed;
    j["rows"] = a.rows;
    j["detail"] = a.detail;
    asserts.push_back(j);
  }
  summary["assertions"] = asserts;
  summary["passed"] = result.passed();
  write_file(dir / "summary.json", summary.dump(2) + '\n');

  json timing;
  timing["id"] = result.id;
  timing["seconds"] = result.seconds;
  timing["budget_seconds"] = result.budget_seconds;
  timing["threads"] = max_threads();
  write_file(dir / "timing.json", timing.dump(2) + '\n');
}

bool VerifyReport::passed() const {
  return std::all_of(assertions.begin(), assertions.end(),
                     [](const Assertion& a) { return a.passed || !a.rule.gate; });
}

VerifyReport verify(const fs::path& dir) {
  json summary;
  try {
    summary = json::parse(read_file(dir / "summary.json"));
  } catch (const json::exception& e) {
    throw Error("verify: bad summary.json: " + std::string(e.what()));
  }
  VerifyReport rep;
  rep.id = summary.at("id").get<std::string>();
  std::vector<Table> tables;
  for (const auto& name : summary.at("tables")) {
    const auto n = name.get<std::string>();
    tables.push_back(Table::from_csv(n, read_file(dir / (n + ".csv"))));
  }
  for (const auto& j : summary.at("assertions")) {
    const Rule r = rule_from_json(j);
    auto a = evaluate(r, tables);
    if (a.passed != j.at("passed").get<bool>()) {
      rep.mismatches.push_back(r.id + ": recorded " + (j.at("passed").get<bool>() ? "pass" : "fail") +
                               ", replay " + (a.passed ? "pass" : "fail"));
    }
    rep.assertions.push_back(std::move(a));
  }
  return rep;
}

// ---------------------------------------------------------------------------

Signal random_smooth(const Grid1D& g, std::uint64_t seed, int terms, double spread) {
  SplitMix64 rng(seed);
  Signal f(g);
  const double reach = std::min(spread, g.length() / 2 - 5);
  for (int j = 0; j < terms; ++j) {
    const double c = rng.uniform(-reach, reach);
    const double eta = rng.uniform(-spread, spread);
    const cplx amp{rng.normal(), rng.normal()};
    for (std::size_t k = 0; k < g.count(); ++k) {
      const double x = g.point(k);
      f[k] += amp * std::exp(-std::numbers::pi * (x - c) * (x - c)) *
              std::polar(1.0, 2.0 * std::numbers::pi * eta * x);
    }
  }
  return f;
}

Signal fixture(const std::string& name, const Grid1D& g, std::uint64_t seed) {
  if (name == "gaussian") return gaussian(g);
  if (name.rfind("hermite", 0) == 0) {
    const std::string tail = name.substr(7);
    if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos) {
      throw Error("fixture: bad hermite order in " + name);
    }
    return hermite(g, std::stoi(tail));
  }
  if (name == "two-bumps") return gaussian(g, -1.5) + gaussian(g, 1.5);
  if (name == "random") return random_smooth(g, seed);
  throw Error("fixture: unknown name " + name + " (gaussian, hermite<n>, two-bumps, random)");
}

}  // namespace stftlab::experiments
