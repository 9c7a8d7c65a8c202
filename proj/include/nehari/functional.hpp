#pragma once

#include <span>
#include <vector>

#include "nehari/lattice.hpp"
#include "nehari/model.hpp"

namespace nehari {

/// Full data of -Δ_p u + V(x)|u|^(p-2)u = f(x,u) on a box.
///
/// Per-vertex potential and coefficient values are tabulated at
/// construction, so kernels never reduce coordinates in inner loops.
class ProblemInstance {
 public:
  /// Throws ModelError if the nonlinearity fails validate(), V is not
  /// positive, or the common period does not divide every torus side.
  ProblemInstance(LatticeBox box, Potential V, Nonlinearity nl, double p);

  const LatticeBox& box() const { return box_; }
  const Potential& potential() const { return V_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  double p() const { return p_; }
  /// Common period of V and the nonlinearity coefficients.
  Index period() const { return period_; }
  Index size() const { return box_.vertex_count(); }

  const Eigen::VectorXd& potential_values() const { return v_values_; }
  std::span<const double> coefficients(Index v) const {
    return {coeffs_.data() + v * ncoef_, ncoef_};
  }
  double f(Index v, double u) const { return nl_.f(coefficients(v), u); }
  double F(Index v, double u) const { return nl_.F(coefficients(v), u); }

 private:
  LatticeBox box_;
  Potential V_;
  Nonlinearity nl_;
  double p_;
  Index period_;
  Eigen::VectorXd v_values_;
  std::size_t ncoef_;
  std::vector<double> coeffs_;
};

struct Norms {
  double lp;   ///< (sum |u|^p)^(1/p)
  double w1p;  ///< (E_p(u) + sum |u|^p)^(1/p)
  double e;    ///< (E_p(u) + sum V |u|^p)^(1/p)
};

/// Δ_p u(x) = sum over the 2N slots of |u(y)-u(x)|^(p-2) (u(y)-u(x)); exterior
/// Dirichlet slots carry u(y) = 0.
Field p_laplacian(const ProblemInstance& inst, const Field& u);

/// Sum of |u(x)-u(y)|^p over unordered edges plus boundary half-edges.
double dirichlet_energy(const ProblemInstance& inst, const Field& u);

Norms norms(const ProblemInstance& inst, const Field& u);

/// ‖u‖^p in the potential-weighted norm.
double e_norm_pow(const ProblemInstance& inst, const Field& u);
double e_norm(const ProblemInstance& inst, const Field& u);

/// (sum |u|^r)^(1/r); r = infinity gives the max norm.
double lr_norm(const Field& u, double r);

/// Φ(u) = ‖u‖^p / p - sum F(x,u).
double phi(const ProblemInstance& inst, const Field& u);

/// Φ(u + du) - Φ(u), evaluated term by term so that small steps keep full
/// relative accuracy where the direct difference would cancel.
double phi_increment(const ProblemInstance& inst, const Field& u, const Field& du);

/// G(u) = -Δ_p u + V |u|^(p-2) u - f(x,u); Φ'(u)v = sum G(u) v.
Field phi_grad(const ProblemInstance& inst, const Field& u);

/// Φ'(u)v in its edge-sum form (no integration by parts).
double phi_prime_pairing(const ProblemInstance& inst, const Field& u, const Field& v);

/// φ'(w)v for φ = ‖·‖^p / p, edge-sum form.
double norm_prime_pairing(const ProblemInstance& inst, const Field& w, const Field& v);

/// Φ'(u)u = ‖u‖^p - sum f(x,u) u; zero exactly on the Nehari set.
double nehari_defect(const ProblemInstance& inst, const Field& u);

/// sum [f(x,u) u / p - F(x,u)]; equals Φ(u) on the Nehari set.
double reduced_energy(const ProblemInstance& inst, const Field& u);

/// ‖G(u)‖_∞, the pointwise defect of the equation.
double residual_inf(const ProblemInstance& inst, const Field& u);

}  // namespace nehari
