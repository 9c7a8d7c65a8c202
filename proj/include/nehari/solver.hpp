#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nehari/nehari.hpp"

namespace nehari {

enum class SolveStatus { Converged, MaxIters, Stalled };

std::string_view to_string(SolveStatus status);

struct ArmijoOptions {
  double c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

struct Seed {
  enum class Kind { Delta, Constant, RandomGaussian, File };
  Kind kind = Kind::Delta;
  /// Delta: vertex coordinates; empty means the box center.
  Coords vertex;
  /// Constant: field value.
  double value = 1.0;
  /// RandomGaussian: 64-bit PRNG seed.
  std::uint64_t rng_seed = 0;
  /// File: CSV in the minimizer format.
  std::string path;

  std::string id() const;
  bool operator==(const Seed&) const = default;
};

struct SolverConfig {
  double tol_residual = 1e-8;
  double tol_energy = 1e-12;
  int max_iters = 20000;
  ArmijoOptions armijo;
  std::vector<Seed> seeds;
  int renormalize_every = 1;
  bool translation_normalize = true;
  /// Coercivity ceiling on ‖u_k‖ along a run; exceeding it is flagged.
  double norm_ceiling = 1e6;
  /// Consecutive accepted steps with relative change below tol_energy and
  /// no new residual minimum before a run is declared stalled.
  int stall_window = 10;
  FiberOptions fiber;

  /// Throws std::invalid_argument on non-positive tolerances or c1 outside (0,1).
  void validate() const;
};

struct TraceRow {
  int iter;
  double psi;
  double residual;
  double step;
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIters;
  double energy = 0.0;
  Field minimizer;
  double residual = 0.0;
  /// Φ'(u)u at the minimizer.
  double nehari_defect = 0.0;
  int iterations = 0;
  std::string seed_id;
  std::vector<double> fiber_history;
  /// Ψ̂ after each accepted step, tracked by accumulating accurate increments.
  std::vector<double> energy_trace;
  /// The accurate increment of each accepted step; strictly negative.
  std::vector<double> decrements;
  std::vector<TraceRow> trace;
  double max_norm = 0.0;
  bool norm_ceiling_exceeded = false;
  std::string message;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Normalized gradient descent on Ψ̂ with Armijo backtracking.
///
/// The trial step starts from a Barzilai-Borwein estimate and is halved
/// until Ψ̂(w - η g) - Ψ̂(w) <= -c1 η ‖g‖². Energy differences go through
/// phi_increment so acceptance stays meaningful when the decrease is far
/// below the rounding level of Ψ̂ itself.
SolveReport minimize(const ProblemInstance& inst, const SolverConfig& cfg, const Field& w0);

/// Shift u by a multiple of the period so its peak |u| lies in [0,T)^N.
/// Ties go to the smallest vertex index.
Field translation_normalize(const ProblemInstance& inst, const Field& u);

Field make_seed(const ProblemInstance& inst, const Seed& seed);

struct MultistartResult {
  /// Least-energy converged run, else the best non-converged run.
  SolveReport best;
  /// Every run, in seed order.
  std::vector<SolveReport> runs;
  std::size_t best_index = 0;
};

/// Runs minimize from every seed (concurrently; NEHARI_THREADS caps the
/// worker count) and merges in seed order.
MultistartResult multistart(const ProblemInstance& inst, const SolverConfig& cfg);

/// Worker count: NEHARI_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

Field read_field_csv(const LatticeBox& box, const std::string& path);

}  // namespace nehari
