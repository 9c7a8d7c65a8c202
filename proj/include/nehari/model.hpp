#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nehari/lattice.hpp"
#include "nehari/report.hpp"

namespace nehari {

/// Raised when problem data violates a structural assumption of the model.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// T-periodic samples over the cell [0,T)^N, row-major like LatticeBox.
class PeriodicSamples {
 public:
  PeriodicSamples(int dim, Index period, std::vector<double> samples);
  static PeriodicSamples constant(int dim, double value);

  int dim() const { return dim_; }
  Index period() const { return period_; }
  const std::vector<double>& samples() const { return samples_; }
  bool is_constant() const { return samples_.size() == 1; }

  /// Cell index of arbitrary integer coordinates (reduced mod T).
  Index site_of(std::span<const Index> coords) const;
  double at(std::span<const Index> coords) const { return samples_[site_of(coords)]; }

  double min() const;
  double max() const;

  bool operator==(const PeriodicSamples&) const = default;

 private:
  int dim_;
  Index period_;
  std::vector<double> samples_;
};

/// The potential V; its bounds are V1 = min() and V2 = max().
using Potential = PeriodicSamples;

enum class NonlinearityKind { PurePower, PowerSum, CustomTable };

std::string_view to_string(NonlinearityKind kind);
NonlinearityKind nonlinearity_kind_from_string(std::string_view name);

struct PowerTerm {
  double exponent;
  PeriodicSamples coefficient;
  bool operator==(const PowerTerm&) const = default;
};

/// Tabulated ratio h(|u|) = f(u) / (|u|^(p-2) u) on one half line.
/// Knots are strictly increasing and positive; h is linear between knots,
/// h(0) = 0, and beyond the last knot h grows like |u|^(q-p).
struct RatioTable {
  std::vector<double> knots;
  std::vector<double> ratios;
  bool operator==(const RatioTable&) const = default;
};

/// f(x,u) and its primitive F(x,u).
///
/// Built-in kinds are f = sum_j b_j(x) |u|^(q_j-2) u. The custom table
/// kind is f = b(x) h(u) |u|^(p-2) u with h read from a RatioTable per sign,
/// which allows non-odd nonlinearities; F is integrated in closed form
/// piece by piece and cached at the knots.
///
/// Construction only checks shape. Whether the data satisfy the growth,
/// positivity and monotonicity assumptions is answered by validate() and
/// check_assumptions().
class Nonlinearity {
 public:
  static Nonlinearity pure_power(double p, double q, PeriodicSamples b);
  static Nonlinearity power_sum(double p, std::vector<PowerTerm> terms);
  static Nonlinearity custom_table(double p, double q, RatioTable positive,
                                   RatioTable negative, PeriodicSamples b);

  NonlinearityKind kind() const { return kind_; }
  double p() const { return p_; }
  /// Largest exponent (the custom table's tail exponent).
  double q() const { return q_; }
  /// Constant a of |f(x,u)| <= a (1 + |u|^(q-1)).
  double growth_constant() const { return a_; }
  void set_growth_constant(double a);

  const std::vector<PowerTerm>& terms() const { return terms_; }
  const RatioTable& positive_table() const { return pos_; }
  const RatioTable& negative_table() const { return neg_; }

  /// Number of coefficient fields; f and F below take their values at one site.
  std::size_t coefficient_count() const;
  const PeriodicSamples& coefficient(std::size_t j) const;
  /// Least common multiple of the coefficient periods.
  Index period() const;
  std::vector<double> coefficients_at(std::span<const Index> coords) const;

  double f(std::span<const double> b, double u) const;
  double F(std::span<const double> b, double u) const;
  /// F(u + delta) - F(u), accurate when |delta| << |u|.
  double F_increment(std::span<const double> b, double u, double delta) const;

  /// Throws ModelError if q <= p, a coefficient sample is not positive or
  /// a table is malformed.
  void validate() const;

  bool operator==(const Nonlinearity& other) const;

 private:
  Nonlinearity() = default;
  double table_ratio(const RatioTable& t, double r) const;
  double table_primitive(const RatioTable& t, const std::vector<double>& cache,
                         double r) const;
  void build_cache();

  NonlinearityKind kind_ = NonlinearityKind::PurePower;
  double p_ = 2.0;
  double q_ = 4.0;
  double a_ = 0.0;
  std::vector<PowerTerm> terms_;
  RatioTable pos_, neg_;
  std::vector<double> pos_cache_, neg_cache_;
};

double eval_f(const Nonlinearity& nl, std::span<const Index> coords, double u);
double eval_F(const Nonlinearity& nl, std::span<const Index> coords, double u);

/// A constant C_eps with |f(x,u)| <= eps |u|^(p-1) + C_eps |u|^(q-1) for every
/// site, confirmed on a log grid |u| in [1e-8, 1e8]. Throws ModelError if the
/// confirmation fails and std::invalid_argument if eps <= 0.
double growth_split(const Nonlinearity& nl, double eps);

/// Checks the split inequality with a given constant on the same grid.
bool growth_split_holds(const Nonlinearity& nl, double eps, double c_eps);

/// The signed log grid used by the sampled checks: n_per_decade points per
/// decade over |u| in [lo, hi], ascending magnitudes.
std::vector<double> log_grid(double lo, double hi, int n_per_decade);

/// Sampled evidence for the assumptions A1-A5 (one report each).
std::vector<OracleReport> check_assumptions(const Nonlinearity& nl,
                                            const Potential& V, double p,
                                            double tol);

}  // namespace nehari
