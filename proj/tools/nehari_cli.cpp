#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "nehari/config.hpp"

using namespace nehari;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitUnconverged = 2;

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

/// Returns the instance, or prints a diagnostic and returns nullopt.
std::optional<ProblemInstance> build_checked(const RunConfig& cfg) {
  std::optional<ProblemInstance> inst;
  try {
    inst.emplace(cfg.make_instance());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
  for (const OracleReport& r :
       check_assumptions(cfg.nonlinearity, cfg.potential, cfg.p, cfg.check.assumption_tol)) {
    if (!r.pass) {
      std::cerr << "error: " << r.name << " failed";
      if (!r.note.empty()) std::cerr << " (" << r.note << ")";
      std::cerr << "\n";
      return std::nullopt;
    }
  }
  return inst;
}

int cmd_solve(const RunConfig& cfg) {
  auto inst = build_checked(cfg);
  if (!inst) return kExitConfig;
  const auto t0 = std::chrono::steady_clock::now();
  MultistartResult result;
  try {
    result = multistart(*inst, cfg.solver);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  emit(cfg.outputs.report, report_json(cfg, result, wall).dump(2) + "\n");
  if (!cfg.outputs.field.empty())
    write_file_atomic(cfg.outputs.field, field_csv(inst->box(), result.best.minimizer));
  if (!cfg.outputs.trace.empty()) write_file_atomic(cfg.outputs.trace, trace_csv(result.best));

  if (!result.best.converged()) {
    std::cerr << "warning: best run " << to_string(result.best.status) << ": " << result.best.message
              << "\n";
    return kExitUnconverged;
  }
  return kExitOk;
}

int cmd_check(const RunConfig& cfg) {
  std::vector<OracleReport> reports =
      check_assumptions(cfg.nonlinearity, cfg.potential, cfg.p, cfg.check.assumption_tol);
  std::optional<ProblemInstance> inst;
  OracleReport build{"instance construction", true, 0.0, 0.0, std::nullopt, ""};
  try {
    inst.emplace(cfg.make_instance());
  } catch (const std::invalid_argument& e) {
    build.pass = false;
    build.max_violation = INFINITY;
    build.note = e.what();
  }
  reports.push_back(build);

  if (inst) {
    auto audit = inequality_audit(*inst, cfg.check.samples, cfg.check.seed);
    reports.insert(reports.end(), audit.begin(), audit.end());
    Rng rng(cfg.check.seed);
    const Field u = random_field(*inst, rng);
    auto fd = fd_gradient_check(*inst, u, cfg.check.fd_directions, cfg.check.fd_h, cfg.check.seed);
    reports.insert(reports.end(), fd.begin(), fd.end());
  }

  json out = json::array();
  bool all = true;
  for (const OracleReport& r : reports) {
    out.push_back(to_json(r));
    all = all && r.pass;
  }
  emit(cfg.outputs.report, out.dump(2) + "\n");
  return all ? kExitOk : kExitUnconverged;
}

int cmd_oracle(const RunConfig& cfg) {
  auto inst = build_checked(cfg);
  if (!inst) return kExitConfig;
  if (inst->size() > 4) {
    std::cerr << "error: instance too large for the brute-force oracle: " << inst->size()
              << " vertices (at most 4)\n";
    return kExitConfig;
  }
  const GroundStateEstimate est = brute_force_ground_state(*inst, cfg.oracle.grid, cfg.oracle.polish_iters);
  const MultistartResult result = multistart(*inst, cfg.solver);
  const double diff = std::abs(est.energy - result.best.energy);
  json out{{"oracle_energy", est.energy},
           {"solver_energy", result.best.energy},
           {"abs_diff", diff},
           {"solver_status", to_string(result.best.status)},
           {"version", kVersion}};
  emit(cfg.outputs.report, out.dump(2) + "\n");
  return diff <= 1e-6 ? kExitOk : kExitUnconverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of the discrete p-Laplacian Schrodinger equation on lattice boxes"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string path;
  auto* solve = app.add_subcommand("solve", "Minimize over the Nehari set from every seed");
  solve->add_option("config", path, "JSON config file")->required();
  auto* check = app.add_subcommand("check", "Assumption checks, inequality audit and gradient checks");
  check->add_option("config", path, "JSON config file")->required();
  auto* oracle = app.add_subcommand("oracle", "Compare the solver with a brute-force scan (<= 4 vertices)");
  oracle->add_option("config", path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*solve) return cmd_solve(cfg);
    if (*check) return cmd_check(cfg);
    return cmd_oracle(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
