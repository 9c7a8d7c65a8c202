#include "nehari/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/tools/minima.hpp>

namespace nehari {

namespace {

Field random_unit(Index n, Rng& rng) {
  Field z(n);
  for (Index i = 0; i < n; ++i) z[i] = rng.normal();
  return z / z.norm();
}

double energy_along(const ProblemInstance& inst, FdTarget target, const Field& x) {
  return target == FdTarget::Phi ? phi(inst, x) : psi(inst, x);
}

Field gradient_of(const ProblemInstance& inst, FdTarget target, const Field& x) {
  return target == FdTarget::Phi ? phi_grad(inst, x) : psi_grad(inst, x);
}

double fd_error(const ProblemInstance& inst, FdTarget target, const Field& u, const Field& g,
                const Field& z, double h) {
  const double pairing = g.dot(z);
  const double fd = (energy_along(inst, target, u + h * z) - energy_along(inst, target, u - h * z)) / (2.0 * h);
  return std::abs(pairing - fd) / std::max(1.0, std::abs(pairing));
}

/// Relative excess of lhs over rhs; <= 0 when lhs <= rhs.
double excess(double lhs, double rhs) {
  const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
  return (lhs - rhs) / scale;
}

struct Audit {
  OracleReport report;
  std::size_t checked = 0;

  explicit Audit(std::string name) {
    report.name = std::move(name);
    report.tolerance = 1e-12;
    report.max_violation = -std::numeric_limits<double>::infinity();
  }

  void record(double violation, const std::string& witness) {
    ++checked;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      if (violation > report.tolerance) report.witness = witness;
    }
  }

  OracleReport finish() {
    if (checked == 0) report.max_violation = 0.0;
    report.pass = report.max_violation <= report.tolerance;
    if (report.note.empty()) report.note = std::to_string(checked) + " samples";
    return report;
  }
};

std::string describe(const char* what, double a, double b) {
  std::ostringstream os;
  os.precision(17);
  os << what << " lhs=" << a << " rhs=" << b;
  return os.str();
}

}  // namespace

std::vector<OracleReport> fd_gradient_check(const ProblemInstance& inst, const Field& u,
                                            int directions, double h, std::uint64_t rng_seed) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const double tol = inst.p() >= 2.0 ? 100.0 * h * h : 100.0 * h;
  Rng rng(rng_seed);
  const bool zero = u.cwiseAbs().maxCoeff() == 0.0;

  OracleReport rphi{.name = "fd gradient of energy", .max_violation = 0.0, .tolerance = tol};
  OracleReport rpsi{.name = "fd gradient of reduced energy", .max_violation = 0.0, .tolerance = tol};
  const Field gphi = phi_grad(inst, u);
  // Ψ̂ is 0-homogeneous, so its derivatives scale like |u|^-k; checking at the
  // sup-normalized direction keeps h comparable to the field.
  Field w, gpsi;
  if (!zero) {
    w = u / u.cwiseAbs().maxCoeff();
    gpsi = psi_grad(inst, w);
  }
  for (int d = 0; d < directions; ++d) {
    const Field z = random_unit(inst.size(), rng);
    const double e1 = fd_error(inst, FdTarget::Phi, u, gphi, z, h);
    if (e1 > rphi.max_violation) rphi.max_violation = e1;
    if (!zero) {
      const double e2 = fd_error(inst, FdTarget::Psi, w, gpsi, z, h);
      if (e2 > rpsi.max_violation) rpsi.max_violation = e2;
    }
  }
  const std::string order = inst.p() >= 2.0 ? "O(h^2)" : "relaxed O(h) since p < 2";
  rphi.note = std::to_string(directions) + " directions, tolerance " + order;
  rpsi.note = zero ? "skipped: reduced energy undefined at u = 0" : rphi.note;
  rphi.pass = rphi.max_violation <= tol;
  rpsi.pass = rpsi.max_violation <= tol;
  return {rphi, rpsi};
}

FdSweep fd_convergence(const ProblemInstance& inst, const Field& u, const Field& z,
                       FdTarget target, const std::vector<double>& steps) {
  FdSweep out;
  out.steps = steps;
  const Field g = gradient_of(inst, target, u);
  for (double h : steps) out.errors.push_back(fd_error(inst, target, u, g, z, h));
  const std::size_t n = steps.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(steps[i]);
    my += std::log(std::max(out.errors[i], std::numeric_limits<double>::min()));
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(steps[i]) - mx;
    sxy += dx * (std::log(std::max(out.errors[i], std::numeric_limits<double>::min())) - my);
    sxx += dx * dx;
  }
  out.slope = sxx > 0 ? sxy / sxx : 0.0;
  return out;
}

GroundStateEstimate coordinate_descent_polish(const ProblemInstance& inst, Field w, int sweeps,
                                              double initial_radius, double energy_tol) {
  double best = psi(inst, w);
  double radius = initial_radius;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const double before = best;
    double largest_move = 0.0;
    for (Index i = 0; i < w.size(); ++i) {
      const double base = w[i];
      auto along = [&](double t) {
        Field trial = w;
        trial[i] = base + t;
        if (trial.cwiseAbs().maxCoeff() == 0.0) return std::numeric_limits<double>::infinity();
        try {
          return psi(inst, trial);
        } catch (const FiberError&) {
          return std::numeric_limits<double>::infinity();
        }
      };
      const auto [t, value] = boost::math::tools::brent_find_minima(along, -radius, radius, std::numeric_limits<double>::digits / 2);
      if (value < best) {
        w[i] = base + t;
        best = value;
        largest_move = std::max(largest_move, std::abs(t));
      }
    }
    // Ψ̂ is scale invariant; keep the direction at unit size
    w /= w.cwiseAbs().maxCoeff();
    if (before - best <= energy_tol * std::abs(best)) break;
    radius = std::max(4.0 * largest_move, 1e-9);
  }
  GroundStateEstimate out;
  out.direction = w;
  out.field = project(inst, w);
  out.energy = phi(inst, out.field);
  return out;
}

GroundStateEstimate brute_force_ground_state(const ProblemInstance& inst, const GridSpec& grid,
                                             int polish_iters) {
  const Index n = inst.size();
  if (n > 4)
    throw std::invalid_argument("brute force is limited to boxes with at most 4 vertices (got " +
                                std::to_string(n) + ")");
  if (!(grid.step > 0.0) || !(grid.hi > grid.lo))
    throw std::invalid_argument("grid needs lo < hi and a positive step");
  const Index per_axis = static_cast<Index>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  auto value = [&](Index k) { return k == per_axis - 1 ? grid.hi : grid.lo + static_cast<double>(k) * grid.step; };

  Index total = 1;
  for (Index i = 0; i < n; ++i) total *= per_axis;

  GroundStateEstimate out;
  out.energy = std::numeric_limits<double>::infinity();
  std::vector<Index> digits(n, 0);
  Field w(n);
  for (Index idx = 0; idx < total; ++idx) {
    Index rem = idx;
    bool on_surface = false;
    for (Index i = 0; i < n; ++i) {
      digits[i] = rem % per_axis;
      rem /= per_axis;
      on_surface = on_surface || digits[i] == 0 || digits[i] == per_axis - 1;
      w[i] = value(digits[i]);
    }
    if (!on_surface || w.cwiseAbs().maxCoeff() == 0.0) continue;
    ++out.directions_scanned;
    const double e = psi(inst, w);
    if (e < out.energy) {
      out.energy = e;
      out.direction = w;
    }
  }

  const auto scanned = out.directions_scanned;
  if (polish_iters > 0) out = coordinate_descent_polish(inst, out.direction, polish_iters, grid.step);
  else out.field = project(inst, out.direction);
  out.directions_scanned = scanned;
  return out;
}

FiberScan fiber_scan(const ProblemInstance& inst, const Field& w, int grid_points) {
  if (grid_points < 3) throw std::invalid_argument("fiber scan needs at least 3 grid points");
  FiberScan out;
  out.s_w = fiber_scalar(inst, w).s;
  const double lo = out.s_w / 100.0;
  out.cell_ratio = std::pow(1e4, 1.0 / (grid_points - 1));
  std::vector<double> s(grid_points), alpha(grid_points);
  for (int k = 0; k < grid_points; ++k) {
    s[k] = lo * std::pow(out.cell_ratio, k);
    alpha[k] = phi(inst, s[k] * w);
  }
  const auto best = std::max_element(alpha.begin(), alpha.end()) - alpha.begin();
  out.argmax_s = s[best];
  int sign_changes = 0;
  bool rising = true;
  for (int k = 1; k < grid_points; ++k) {
    const bool up = alpha[k] > alpha[k - 1];
    if (up != rising) {
      ++sign_changes;
      rising = up;
    }
  }
  out.unimodal = sign_changes <= 1;
  return out;
}

Field random_field(const ProblemInstance& inst, Rng& rng) {
  const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
  Field u(inst.size());
  for (Index i = 0; i < u.size(); ++i) u[i] = scale * rng.normal();
  return u;
}

std::vector<OracleReport> inequality_audit(const ProblemInstance& inst, int samples,
                                           std::uint64_t rng_seed) {
  if (samples < 1) throw std::invalid_argument("audit needs at least one sample");
  Rng rng(rng_seed);
  const double p = inst.p();
  const double q = inst.nonlinearity().q();
  const int N = inst.box().dim();
  const double V1 = inst.potential().min(), V2 = inst.potential().max();
  const double c_pn = 1.0 + std::pow(2.0, p) * N;
  const double nu1 = std::min(std::pow(V1, 1.0 / p), 1.0);
  const double nu2 = std::max(std::pow(V2, 1.0 / p), 1.0);

  Audit lower("norm equivalence: lp <= w1p");
  Audit upper("norm equivalence: w1p^p <= (1 + 2^p N) lp^p");
  Audit elow("norm equivalence: min(V1,1)^(1/p) w1p <= e");
  Audit ehigh("norm equivalence: e <= max(V2,1)^(1/p) w1p");
  Audit embed("embedding: lq <= lp");
  Audit interp("interpolation: lq <= linf^((q-p)/q) lp^(p/q)");
  Audit dphi("norm derivative bound: |phi'(w)v| <= 2 |w|^(p-1) |v|");
  Audit split("growth split: |f| <= eps |u|^(p-1) + C_eps |u|^(q-1)");
  Audit sandwich_lo("primitive sandwich: 0 < F");
  Audit sandwich_hi("primitive sandwich: F < f u / p");

  const std::vector<double> eps_values = {1e-3, 1e-1, 1.0};
  std::vector<double> c_eps;
  for (double e : eps_values) c_eps.push_back(growth_split(inst.nonlinearity(), e));

  double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Field u = random_field(inst, rng);
    if (u.cwiseAbs().maxCoeff() == 0.0) continue;
    const Norms nm = norms(inst, u);
    lower.record(excess(nm.lp, nm.w1p), describe("lp/w1p", nm.lp, nm.w1p));
    upper.record(excess(std::pow(nm.w1p, p), c_pn * std::pow(nm.lp, p)), describe("w1p^p", std::pow(nm.w1p, p), c_pn * std::pow(nm.lp, p)));
    elow.record(excess(nu1 * nm.w1p, nm.e), describe("nu1 w1p/e", nu1 * nm.w1p, nm.e));
    ehigh.record(excess(nm.e, nu2 * nm.w1p), describe("e/nu2 w1p", nm.e, nu2 * nm.w1p));

    const double lq = lr_norm(u, q), linf = lr_norm(u, std::numeric_limits<double>::infinity());
    embed.record(excess(lq, nm.lp), describe("lq/lp", lq, nm.lp));
    const double rhs = std::pow(linf, (q - p) / q) * std::pow(nm.lp, p / q);
    interp.record(excess(lq, rhs), describe("lq/interp", lq, rhs));

    const Field w = u / nm.e;
    const Field v = random_field(inst, rng);
    const double lhs = std::abs(norm_prime_pairing(inst, w, v));
    const double bound = 2.0 * std::pow(e_norm(inst, w), p - 1.0) * e_norm(inst, v);
    dphi.record(excess(lhs, bound), describe("phi'", lhs, bound));

    // scalar checks at a random vertex and magnitude
    const Index x = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(inst.size()));
    const double mag = std::pow(10.0, rng.uniform(-6.0, 6.0));
    const double s = rng.uniform() < 0.5 ? -mag : mag;
    const double fs = inst.f(x, s), Fs = inst.F(x, s);
    for (std::size_t j = 0; j < eps_values.size(); ++j) {
      const double r = eps_values[j] * std::pow(mag, p - 1.0) + c_eps[j] * std::pow(mag, q - 1.0);
      split.record(excess(std::abs(fs), r), describe("split", std::abs(fs), r));
    }
    sandwich_lo.record(Fs > 0.0 ? -1.0 : 1.0, describe("F", 0.0, Fs));
    sandwich_hi.record(excess(Fs, fs * s / p), describe("F vs fu/p", Fs, fs * s / p));
    const double ratio = Fs / (fs * s / p);
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
  }

  std::ostringstream note;
  note.precision(17);
  note << samples << " samples; F/(fu/p) in [" << min_ratio << ", " << max_ratio << "]";
  sandwich_hi.report.note = note.str();
  return {lower.finish(), upper.finish(), elow.finish(), ehigh.finish(), embed.finish(),
          interp.finish(), dphi.finish(), split.finish(), sandwich_lo.finish(), sandwich_hi.finish()};
}

}  // namespace nehari
