#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "stftlab/experiments.hpp"

using namespace stftlab;
using namespace stftlab::experiments;
namespace fs = std::filesystem;

namespace {

Table numbers() {
  Table t{"t", {"tag", "a", "b"}, {}};
  t.add({"x", "1", "2"});
  t.add({"y", "3", "3"});
  t.add({"x", "inf", "4"});
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("tables round trip through csv") {
  const auto t = numbers();
  const auto back = Table::from_csv("t", t.to_csv());
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(t.to_csv() == "tag,a,b\nx,1,2\ny,3,3\nx,inf,4\n");
  CHECK_THROWS_AS(Table::from_csv("t", ""), Error);
  Table bad{"b", {"a"}, {}};
  CHECK_THROWS_AS(bad.add({"1", "2"}), Error);
  CHECK_THROWS_AS(t.column("zzz"), Error);
}

TEST_CASE("cells") {
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, 1e-16}) CHECK(parse_cell(cell(v)) == v);
  CHECK(std::isinf(parse_cell(cell(std::numeric_limits<double>::infinity()))));
  CHECK(std::isnan(parse_cell(cell(std::nan("")))));
  CHECK(cell(true) == "1");
  CHECK_THROWS_AS(parse_cell("1.5x"), Error);
  CHECK_THROWS_AS(parse_cell("finite"), Error);
}

TEST_CASE("rule evaluation") {
  const std::vector<Table> ts{numbers()};
  auto run = [&](Rule r) {
    r.id = "r";
    r.table = "t";
    return evaluate(r, ts);
  };
  CHECK_FALSE(run({.kind = "le", .column = "a", .other = "b"}).passed);  // inf > 4
  CHECK(run({.kind = "le", .column = "a", .other = "b", .skip_nonfinite = true}).passed);
  CHECK(run({.kind = "le", .column = "a", .value = 3, .where_column = "tag", .where_value = "y"}).passed);
  CHECK(run({.kind = "ge", .column = "b", .other = "a", .where_column = "tag", .where_value = "y"}).passed);
  CHECK_FALSE(run({.kind = "ge", .column = "b", .other = "a", .factor = 2, .where_column = "tag",
                   .where_value = "y"}).passed);
  CHECK(run({.kind = "increasing", .column = "b", .where_column = "tag", .where_value = "x"}).passed);
  CHECK_FALSE(run({.kind = "nonincreasing", .column = "b"}).passed);  // 2, 3, 4
  CHECK(run({.kind = "nonincreasing", .column = "b", .where_column = "tag", .where_value = "y"}).passed);
  CHECK(run({.kind = "abs_le", .column = "a", .other = "b", .value = 0, .where_column = "tag",
             .where_value = "y"}).passed);
  CHECK(run({.kind = "rel_le", .column = "b", .other = "a", .value = 1.0, .where_column = "tag",
             .where_value = "x", .skip_nonfinite = true}).passed);
  CHECK(run({.kind = "max_ge", .column = "b", .value = 4}).passed);
  CHECK_FALSE(run({.kind = "max_ge", .column = "b", .value = 4.5}).passed);
  CHECK(run({.kind = "true", .column = "b"}).passed);

  const auto none = run({.kind = "le", .column = "a", .where_column = "tag", .where_value = "q"});
  CHECK_FALSE(none.passed);
  CHECK(none.detail == "no rows selected");
  Rule missing{.id = "m", .table = "absent", .kind = "le", .column = "a"};
  CHECK_FALSE(evaluate(missing, ts).passed);
  CHECK_THROWS_AS(run({.kind = "between", .column = "a"}), Error);

  Rule r{.id = "x", .invariant = "inv", .table = "t", .kind = "le", .column = "a", .value = 0.1, .factor = 3,
         .skip_nonfinite = true, .gate = false};
  const auto back = rule_from_json(rule_to_json(r));
  CHECK(back.value == 0.1);
  CHECK(back.factor == 3);
  CHECK(back.skip_nonfinite);
  CHECK_FALSE(back.gate);
  CHECK(back.invariant == "inv");
}

TEST_CASE("catalog and manifests") {
  CHECK(catalog().size() == 17);
  for (const auto& info : catalog()) {
    CHECK(info.budget_seconds > 0);
    CHECK(info.defaults.is_object());
  }
  CHECK_THROWS_WITH_AS(find_experiment("nope"), "unknown experiment id: nope", Error);

  const auto m = manifest_from_json("isometry-sweep", json{{"seed", 7}, {"params", {{"fixtures", 5}}}});
  CHECK(m.seed == 7);
  CHECK(m.params.at("fixtures") == 5);
  CHECK_THROWS_WITH_AS(manifest_from_json("isometry-sweep", json{{"sead", 7}}), "config: unknown key sead", Error);
  CHECK_THROWS_WITH_AS(manifest_from_json("isometry-sweep", json{{"params", {{"bogus", 1}}}}),
                       "config: unknown key params.bogus", Error);
  CHECK_THROWS_AS(manifest_from_json("isometry-sweep", json{{"params", {{"N", 512.5}}}}), Error);
  CHECK_THROWS_AS(manifest_from_json("isometry-sweep", json{{"params", {{"N", "512"}}}}), Error);
  CHECK_THROWS_AS(manifest_from_json("isometry-sweep", json{{"seed", -1}}), Error);
  // Float parameters accept integers.
  CHECK_NOTHROW(manifest_from_json("isometry-sweep", json{{"params", {{"L", 32}}}}));
  CHECK_THROWS_AS(run(Manifest{"nope"}), Error);
}

TEST_CASE("fixtures") {
  const auto g = make_grid(16, 256);
  CHECK(fixture("gaussian", g).values == gaussian(g).values);
  CHECK(fixture("hermite2", g).values == hermite(g, 2).values);
  CHECK(fixture("random", g, 3).values == random_smooth(g, 3).values);
  CHECK(fixture("random", g, 3).values != random_smooth(g, 4).values);
  CHECK_THROWS_AS(fixture("hermite", g), Error);
  CHECK_THROWS_AS(fixture("hermitex", g), Error);
  CHECK_THROWS_AS(fixture("square", g), Error);
}

TEST_CASE("run, write, verify and tamper") {
  const fs::path dir = fs::temp_directory_path() / "stftlab_test_experiments";
  fs::remove_all(dir);
  const auto m = manifest_from_json("isometry-sweep", json{{"params", {{"fixtures", 6}}}});
  const auto r = run(m);
  CHECK(r.passed());
  REQUIRE(r.tables.size() == 1);
  CHECK(r.tables[0].rows.size() == 6);
  write_outputs(r, dir / "a");
  write_outputs(run(m), dir / "b");
  for (const char* name : {"isometry.csv", "summary.json", "isometry-sweep_long.csv"}) {
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  CHECK(fs::exists(dir / "a" / "timing.json"));

  const auto v = verify(dir / "a");
  CHECK(v.id == "isometry-sweep");
  CHECK(v.consistent());
  CHECK(v.passed());

  // A deviation above tolerance must be caught on replay.
  auto t = Table::from_csv("isometry", slurp(dir / "a" / "isometry.csv"));
  t.rows[2][t.column("deviation")] = "0.5";
  std::ofstream(dir / "a" / "isometry.csv", std::ios::binary) << t.to_csv();
  const auto w = verify(dir / "a");
  CHECK_FALSE(w.consistent());
  CHECK_FALSE(w.passed());

  fs::remove(dir / "a" / "isometry.csv");
  CHECK_THROWS_AS(verify(dir / "a"), Error);
  CHECK_THROWS_AS(verify(dir / "missing"), Error);
  fs::remove_all(dir);
}

TEST_CASE("seed changes randomized experiments only through fixtures") {
  const auto a = run(manifest_from_json("isometry-sweep", json{{"seed", 1}, {"params", {{"fixtures", 6}}}}));
  const auto b = run(manifest_from_json("isometry-sweep", json{{"seed", 2}, {"params", {{"fixtures", 6}}}}));
  // Rows 0..3 are Hermite functions and do not depend on the seed.
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.tables[0].rows[i] == b.tables[0].rows[i]);
  CHECK(a.tables[0].rows[4] != b.tables[0].rows[4]);
}
