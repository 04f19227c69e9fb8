#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stftlab/signal.hpp"

namespace stftlab::experiments {

using json = nlohmann::ordered_json;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::size_t column(const std::string& label) const;
  std::string to_csv() const;
  static Table from_csv(const std::string& name, const std::string& text);
};

std::string cell(double v);
std::string cell(int v);
std::string cell(std::size_t v);
std::string cell(bool v);
double parse_cell(const std::string& text);

// Declarative check over one table column; `verify` replays these from the
// stored CSVs.
//   le / ge      column <= / >= factor * (other column, or value)
//   abs_le       |column - other| <= value (other empty: |column| <= value)
//   rel_le       |column - other| <= value * |other|
//   true         column != 0
//   max_ge       max over rows of column >= value
//   nonincreasing, increasing   in row order
struct Rule {
  std::string id;
  std::string invariant;
  std::string table;
  std::string kind;
  std::string column;
  std::string other;
  double value = 0.0;
  double factor = 1.0;
  std::string where_column;  // rows whose where_column equals where_value
  std::string where_value;
  bool skip_nonfinite = false;
  bool gate = true;  // false: reported, never fails the run
};

struct Assertion {
  Rule rule;
  bool passed = false;
  std::size_t rows = 0;
  std::string detail;
};

Assertion evaluate(const Rule& rule, const std::vector<Table>& tables);

json rule_to_json(const Rule& rule);
Rule rule_from_json(const json& j);

struct Manifest {
  std::string id;
  std::uint64_t seed = 1;
  json params = json::object();  // overrides; unknown keys are rejected
};

/// Strict parse of {"seed": ..., "params": {...}}; anything else throws
/// naming the key.
Manifest manifest_from_json(const std::string& id, const json& config);

struct ExperimentResult {
  std::string id;
  std::uint64_t seed = 1;
  json params;
  std::vector<Table> tables;
  json summary = json::object();
  std::vector<Assertion> assertions;
  double seconds = 0.0;
  double budget_seconds = 0.0;

  bool passed() const;
};

struct ExperimentInfo {
  std::string id;
  std::string description;
  double budget_seconds = 0.0;
  json defaults;
};

const std::vector<ExperimentInfo>& catalog();
const ExperimentInfo& find_experiment(const std::string& id);

ExperimentResult run(const Manifest& manifest);

/// One CSV per table, <id>_long.csv (table,row,column,value), summary.json
/// and timing.json. Everything but timing.json is deterministic.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct VerifyReport {
  std::string id;
  std::vector<Assertion> assertions;
  std::vector<std::string> mismatches;  // recorded outcome differs from replay

  bool consistent() const { return mismatches.empty(); }
  bool passed() const;
};

VerifyReport verify(const std::filesystem::path& dir);

// Fixtures shared by experiments, the CLI and the bindings.

/// Sum of `terms` modulated Gaussians with random centres, frequencies and
/// complex amplitudes.
Signal random_smooth(const Grid1D& g, std::uint64_t seed, int terms = 4, double spread = 2.0);

/// Named fixtures: gaussian, hermite<n>, two-bumps, random.
Signal fixture(const std::string& name, const Grid1D& g, std::uint64_t seed = 1);

}  // namespace stftlab::experiments
