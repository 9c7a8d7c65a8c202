#pragma once

#include <optional>
#include <string>

namespace nehari {

/// Outcome of one verification check. `pass` holds iff
/// `max_violation <= tolerance`.
struct OracleReport {
  std::string name;
  bool pass = true;
  double max_violation = 0.0;
  double tolerance = 0.0;
  std::optional<std::string> witness = std::nullopt;
  std::string note = {};
};

}  // namespace nehari
