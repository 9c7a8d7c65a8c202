#pragma once

#include <stdexcept>

#include "nehari/functional.hpp"

namespace nehari {

/// The bracket search left [1e-30, 1e30] or ran out of expansion steps:
/// θ_w never changed sign, so the nonlinearity lacks the growth structure
/// that guarantees a crossing.
class FiberError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FiberOptions {
  /// Stop once |θ_w(s)| <= theta_rtol * ‖w‖^p.
  double theta_rtol = 1e-12;
  /// ...or once the bracket is narrower than s_rtol * s.
  double s_rtol = 1e-10;
  int max_expansions = 200;
  int max_iterations = 200;
  /// Use the closed form for pure-power nonlinearities.
  bool closed_form = true;
};

/// Root s_w of the monotone factor θ_w, with θ_w(s_lo) > 0 > θ_w(s_hi).
struct FiberResult {
  double s = 0.0;
  double theta_at_s = 0.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  int iterations = 0;
};

/// θ_w(s) = ‖w‖^p - s^(1-p) sum f(x, s w(x)) w(x), so that
/// d/ds Φ(s w) = s^(p-1) θ_w(s).
double theta(const ProblemInstance& inst, const Field& w, double s);

/// (‖w‖^p / sum b |w|^q)^(1/(q-p)) for a pure-power nonlinearity.
double closed_form_fiber_scalar(const ProblemInstance& inst, const Field& w);

/// Unique maximizer of s -> Φ(s w).
///
/// Geometric bracketing from s = 1 (halving or doubling), bisection down to
/// a 1e-3 relative bracket, then Newton steps on a central-difference slope,
/// falling back to bisection whenever the slope is not negative or the step
/// leaves the bracket.
FiberResult fiber_scalar(const ProblemInstance& inst, const Field& w,
                         const FiberOptions& opts = {});

/// m̂(w) = s_w w, the single point of the ray through w on the Nehari set.
Field project(const ProblemInstance& inst, const Field& w, const FiberOptions& opts = {});

/// Ψ̂(w) = Φ(m̂(w)); invariant under w -> t w for t > 0.
double psi(const ProblemInstance& inst, const Field& w, const FiberOptions& opts = {});

/// Gradient field of Ψ̂: s_w G(s_w w).
Field psi_grad(const ProblemInstance& inst, const Field& w, const FiberOptions& opts = {});

}  // namespace nehari
