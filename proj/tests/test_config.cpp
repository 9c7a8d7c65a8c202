#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nehari/config.hpp"

using namespace testing;
using nlohmann::json;

namespace {

json torus3_doc() {
  return json::parse(R"({
    "instance": {"dim": 1, "sides": [3], "bc": "torus", "p": 2.0,
                 "potential": {"constant": 1.0},
                 "nonlinearity": {"kind": "pure-power", "exponents": [4.0]}}
  })");
}

json rich_doc() {
  return json::parse(R"({
    "instance": {"dim": 2, "sides": [6, 4], "bc": "torus", "p": 1.5, "period": 2,
                 "potential": {"samples": [1.0, 0.5, 2.0, 1.25]},
                 "nonlinearity": {"kind": "power-sum", "exponents": [2.5, 3.75],
                                  "coefficients": [{"constant": 1.0}, {"samples": [1, 2, 3, 0.1]}],
                                  "a": 12.5}},
    "solver": {"tol_residual": 1e-9, "max_iters": 500, "stall_window": 7,
               "armijo": {"c1": 0.001, "backtrack": 0.25, "max_backtracks": 30},
               "fiber": {"theta_rtol": 1e-13},
               "seeds": [{"kind": "delta", "vertex": [1, 2]}, {"kind": "random-gaussian", "seed": 18446744073709551615},
                         {"kind": "constant", "value": 0.1}, {"kind": "file", "path": "seed.csv"}]},
    "outputs": {"report": "r.json", "field": "u.csv"},
    "check": {"samples": 50, "fd_h": 1e-3},
    "oracle": {"grid": [-1, 1, 0.25], "polish_iters": 7}
  })");
}

std::string parse_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const RunConfig cfg = parse_config(torus3_doc());
  CHECK(cfg.dim == 1);
  CHECK(cfg.bc == Boundary::Torus);
  CHECK(cfg.solver.tol_residual == 1e-8);
  CHECK(cfg.solver.tol_energy == 1e-12);
  CHECK(cfg.solver.max_iters == 20000);
  CHECK(cfg.solver.armijo.max_backtracks == 60);
  CHECK(cfg.solver.seeds.size() == 3);
  const ProblemInstance inst = cfg.make_instance();
  CHECK(phi(inst, Field::Ones(3)) == doctest::Approx(0.75));
}

TEST_CASE("echoed config reparses to the same run") {
  for (const json& doc : {torus3_doc(), rich_doc()}) {
    const RunConfig a = parse_config(doc);
    const json echo = to_json(a);
    const RunConfig b = parse_config(json::parse(echo.dump()));
    CHECK(a.dim == b.dim);
    CHECK(a.sides == b.sides);
    CHECK(a.bc == b.bc);
    CHECK(a.p == b.p);
    CHECK(a.period == b.period);
    CHECK(a.potential == b.potential);
    CHECK(a.nonlinearity == b.nonlinearity);
    CHECK(a.solver.seeds == b.solver.seeds);
    CHECK(a.solver.tol_residual == b.solver.tol_residual);
    CHECK(a.solver.armijo.c1 == b.solver.armijo.c1);
    CHECK(a.solver.fiber.theta_rtol == b.solver.fiber.theta_rtol);
    CHECK(a.outputs == b.outputs);
    CHECK(a.check == b.check);
    CHECK(a.oracle == b.oracle);
    CHECK(to_json(b) == echo);
  }
}

TEST_CASE("numbers survive the echo bit for bit") {
  json doc = torus3_doc();
  doc["instance"]["potential"] = {{"constant", 0.1 + 0.2}};
  doc["instance"]["p"] = 2.0000000000000004;
  const RunConfig b = parse_config(json::parse(to_json(parse_config(doc)).dump()));
  CHECK(b.potential.samples()[0] == 0.1 + 0.2);
  CHECK(b.p == 2.0000000000000004);
}

TEST_CASE("diagnostics name the offending key") {
  json d = torus3_doc();
  d["instance"]["bogus"] = 1;
  CHECK(parse_error(d).find("instance.bogus") != std::string::npos);

  d = torus3_doc();
  d["instance"]["nonlinearity"]["exponents"] = {"four"};
  CHECK(parse_error(d).find("instance.nonlinearity.exponents[0]") != std::string::npos);

  d = torus3_doc();
  d["instance"]["sides"] = {3, 3};
  CHECK(parse_error(d).find("instance.sides") != std::string::npos);

  d = torus3_doc();
  d["solver"] = {{"seeds", {{{"kind", "sunbeam"}}}}};
  CHECK(parse_error(d).find("solver.seeds[0].kind") != std::string::npos);

  d = torus3_doc();
  d["instance"]["potential"] = {{"samples", {1.0, 2.0}}};
  CHECK(parse_error(d).find("instance.potential") != std::string::npos);

  d = torus3_doc();
  d["solver"] = {{"armijo", {{"c1", 2.0}}}};
  CHECK(parse_error(d).find("solver") != std::string::npos);

  d = torus3_doc();
  d.erase("instance");
  CHECK(parse_error(d).find("instance") != std::string::npos);
}

TEST_CASE("model violations surface at instance construction") {
  json d = torus3_doc();
  d["instance"]["sides"] = {8};
  d["instance"]["period"] = 3;
  const RunConfig cfg = parse_config(d);
  CHECK_THROWS_WITH(cfg.make_instance(), doctest::Contains("period must divide side"));

  d = torus3_doc();
  d["instance"]["nonlinearity"]["exponents"] = {2.0};
  CHECK_THROWS_WITH(parse_config(d).make_instance(), doctest::Contains("A1"));
}

TEST_CASE("syntax errors report a line") {
  const auto path = std::filesystem::temp_directory_path() / "nehari_bad_config.json";
  {
    std::ofstream out(path);
    out << "{\n  \"instance\": {\n    \"dim\": 1,\n    oops\n  }\n}\n";
  }
  try {
    load_config(path.string());
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(path.string() + ":4:") == 0);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
}

TEST_CASE("custom table config") {
  json d = torus3_doc();
  d["instance"]["nonlinearity"] = json::parse(R"({"kind": "custom-table", "exponents": [4.0],
      "table": {"positive": [[0.5, 0.3], [1.0, 1.0]], "negative": [[1.0, 2.0]]}})");
  const RunConfig cfg = parse_config(d);
  CHECK(cfg.nonlinearity.kind() == NonlinearityKind::CustomTable);
  CHECK(parse_config(json::parse(to_json(cfg).dump())).nonlinearity == cfg.nonlinearity);
  d["instance"]["nonlinearity"]["table"].erase("negative");
  CHECK(parse_error(d).find("table.negative") != std::string::npos);
}

TEST_CASE("field and trace CSV") {
  const LatticeBox box({2, 2}, Boundary::DirichletZero);
  const std::string csv = field_csv(box, Field{{0.1, -1.0, 1.0 / 3.0, 2.0}});
  CHECK(csv ==
        "x1,x2,u\n0,0,0.10000000000000001\n0,1,-1\n1,0,0.33333333333333331\n1,1,2\n");
  SolveReport rep;
  rep.trace = {{0, 1.5, 0.25, 0.0}, {1, 1.25, 1e-9, 0.5}};
  CHECK(trace_csv(rep) == "iter,psi,residual,step\n0,1.5,0.25,0\n1,1.25,1.0000000000000001e-09,0.5\n");
}

TEST_CASE("report contains the required keys and is reproducible") {
  const RunConfig cfg = parse_config(torus3_doc());
  const auto inst = cfg.make_instance();
  const auto res = multistart(inst, cfg.solver);
  json a = report_json(cfg, res, 0.5);
  for (const char* k : {"energy", "residual", "iterations", "status", "seed_id", "s_w_final", "config_echo", "version"})
    CHECK(a.contains(k));
  CHECK(a["status"] == "converged");
  CHECK(std::abs(a["energy"].get<double>() - 0.75) <= 1e-8);
  json b = report_json(cfg, multistart(inst, cfg.solver), 9.0);
  a.erase("wall_time_seconds");
  b.erase("wall_time_seconds");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("atomic write replaces the file") {
  const auto path = std::filesystem::temp_directory_path() / "nehari_atomic.txt";
  write_file_atomic(path.string(), "one");
  write_file_atomic(path.string(), "two");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  CHECK(s == "two");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}
