#pragma once

#include <cstdint>
#include <vector>

#include "nehari/nehari.hpp"
#include "nehari/random.hpp"
#include "nehari/report.hpp"

namespace nehari {

/// Central-difference checks of Φ' and Ψ̂' along random unit directions.
///
/// The error measure is |Σ G·z - (E(u+hz) - E(u-hz))/2h| / max(1, |Σ G·z|).
/// Tolerance is 100 h² for p >= 2 and 100 h for p < 2, where the kernel
/// |t|^(p-2)t is not differentiable at 0. The Ψ̂ check is skipped (and
/// reported as passing with a note) when u = 0; otherwise it runs at
/// u / ‖u‖_∞, which Ψ̂ cannot distinguish from u.
std::vector<OracleReport> fd_gradient_check(const ProblemInstance& inst, const Field& u,
                                            int directions, double h,
                                            std::uint64_t rng_seed = 20240601);

enum class FdTarget { Phi, Psi };

struct FdSweep {
  std::vector<double> steps;
  std::vector<double> errors;
  /// Least-squares slope of log(error) against log(h).
  double slope = 0.0;
};

/// Error of the central difference along one fixed direction z for each h.
FdSweep fd_convergence(const ProblemInstance& inst, const Field& u, const Field& z,
                       FdTarget target, const std::vector<double>& steps);

struct GridSpec {
  double lo = -2.0;
  double hi = 2.0;
  double step = 0.05;
};

struct GroundStateEstimate {
  double energy = 0.0;
  /// The Nehari point m̂(w) of the best direction.
  Field field;
  Field direction;
  std::size_t directions_scanned = 0;
};

/// Brute-force inf of Φ over the Nehari set for boxes with <= 4 vertices.
///
/// Scans every grid point on the surface of the cube [lo,hi]^n (a point with
/// some coordinate at lo or hi), takes the least Ψ̂, then polishes that
/// direction by coordinate descent.
GroundStateEstimate brute_force_ground_state(const ProblemInstance& inst, const GridSpec& grid,
                                             int polish_iters);

/// Coordinate descent on Ψ̂ from w: each sweep minimizes along every
/// coordinate in turn with Brent's method over [-r, r], r shrinking to the
/// last sweep's largest move. Stops after `sweeps` sweeps or once a sweep
/// gains less than `energy_tol` (relative).
GroundStateEstimate coordinate_descent_polish(const ProblemInstance& inst, Field w,
                                              int sweeps, double initial_radius,
                                              double energy_tol = 1e-15);

struct FiberScan {
  double s_w = 0.0;
  double argmax_s = 0.0;
  /// Ratio between consecutive grid points, i.e. one grid cell.
  double cell_ratio = 0.0;
  bool unimodal = false;
};

/// α_w(s) = Φ(s w) on a log grid over [s_w/100, 100 s_w].
FiberScan fiber_scan(const ProblemInstance& inst, const Field& w, int grid_points);

/// Random-field checks of the norm equivalences, the growth split, the
/// F sandwich, ℓ^p ⊂ ℓ^q, the interpolation inequality and the bound on the
/// derivative of ‖·‖^p/p. Each passes iff no sample exceeds a relative
/// slack of 1e-12.
std::vector<OracleReport> inequality_audit(const ProblemInstance& inst, int samples,
                                           std::uint64_t rng_seed);

/// Fields with random magnitudes and random scale, as the audit draws them.
Field random_field(const ProblemInstance& inst, Rng& rng);

}  // namespace nehari
