#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "nehari/oracle.hpp"
#include "nehari/solver.hpp"

namespace nehari {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid or unreadable configuration; the message leads with a line
/// number or a dotted key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputPaths {
  std::string report;
  std::string field;
  std::string trace;
  bool operator==(const OutputPaths&) const = default;
};

struct CheckOptions {
  int samples = 10000;
  std::uint64_t seed = 20240601;
  int fd_directions = 8;
  double fd_h = 1e-4;
  double assumption_tol = 1e-9;
  bool operator==(const CheckOptions&) const = default;
};

struct OracleOptions {
  GridSpec grid;
  int polish_iters = 200;
  bool operator==(const OracleOptions& o) const {
    return grid.lo == o.grid.lo && grid.hi == o.grid.hi && grid.step == o.grid.step &&
           polish_iters == o.polish_iters;
  }
};

/// Parsed run configuration. Problem data are kept unvalidated so that
/// `check` can report on models the solver would refuse.
struct RunConfig {
  int dim = 1;
  std::vector<Index> sides;
  Boundary bc = Boundary::Torus;
  double p = 2.0;
  Index period = 1;
  Potential potential = PeriodicSamples::constant(1, 1.0);
  Nonlinearity nonlinearity = Nonlinearity::pure_power(2.0, 4.0, PeriodicSamples::constant(1, 1.0));
  SolverConfig solver;
  OutputPaths outputs;
  CheckOptions check;
  OracleOptions oracle;

  /// Builds and validates the instance (throws ModelError / std::invalid_argument).
  ProblemInstance make_instance() const;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

nlohmann::json to_json(const OracleReport& r);
nlohmann::json report_json(const RunConfig& cfg, const MultistartResult& result, double wall_seconds);

/// Minimizer as "x1,...,xN,u", one vertex per row in row-major order.
std::string field_csv(const LatticeBox& box, const Field& u);
/// "iter,psi,residual,step" rows.
std::string trace_csv(const SolveReport& rep);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace nehari
