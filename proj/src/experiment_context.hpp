#pragma once

#include <string>
#include <vector>

#include "stftlab/experiments.hpp"

namespace stftlab::experiments {

struct Context {
  json params;  // defaults merged with overrides
  std::uint64_t seed = 1;
  ExperimentResult* out = nullptr;

  double num(const char* key) const { return params.at(key).get<double>(); }
  int integer(const char* key) const { return params.at(key).get<int>(); }
  std::size_t count(const char* key) const { return params.at(key).get<std::size_t>(); }
  std::string text(const char* key) const { return params.at(key).get<std::string>(); }
  std::vector<double> list(const char* key) const { return params.at(key).get<std::vector<double>>(); }
  std::vector<int> ints(const char* key) const { return params.at(key).get<std::vector<int>>(); }

  void add(Table t) { out->tables.push_back(std::move(t)); }
  void check(Rule r) { rules.push_back(std::move(r)); }
  json& summary() { return out->summary; }

  std::vector<Rule> rules;
};

using Runner = void (*)(Context&);

struct Entry {
  ExperimentInfo info;
  Runner run;
};

const std::vector<Entry>& entries();

}  // namespace stftlab::experiments
