#include "nehari/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "nehari/random.hpp"

namespace nehari {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max-iters";
    case SolveStatus::Stalled: return "stalled";
  }
  return "?";
}

std::string Seed::id() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Delta:
      os << "delta@[";
      for (std::size_t i = 0; i < vertex.size(); ++i) os << (i ? "," : "") << vertex[i];
      os << (vertex.empty() ? "center" : "") << "]";
      break;
    case Kind::Constant: os << "constant(" << value << ")"; break;
    case Kind::RandomGaussian: os << "random-gaussian(seed=" << rng_seed << ")"; break;
    case Kind::File: os << "file(" << path << ")"; break;
  }
  return os.str();
}

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0) || !(tol_energy > 0.0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
  if (!(armijo.c1 > 0.0 && armijo.c1 < 1.0)) throw std::invalid_argument("armijo c1 must lie in (0,1)");
  if (!(armijo.backtrack > 0.0 && armijo.backtrack < 1.0))
    throw std::invalid_argument("armijo backtrack factor must lie in (0,1)");
  if (armijo.max_backtracks < 1) throw std::invalid_argument("max_backtracks must be >= 1");
  if (renormalize_every < 0) throw std::invalid_argument("renormalize_every must be >= 0");
  if (stall_window < 1) throw std::invalid_argument("stall_window must be >= 1");
}

SolveReport minimize(const ProblemInstance& inst, const SolverConfig& cfg, const Field& w0) {
  cfg.validate();
  if (w0.size() != inst.size()) throw std::invalid_argument("seed length does not match box");
  if (w0.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("seed must be nonzero");
  const double p = inst.p();

  SolveReport rep;
  Field w = w0 / e_norm(inst, w0);
  FiberResult fr = fiber_scalar(inst, w, cfg.fiber);
  double s = fr.s;
  Field u = s * w;
  Field G = phi_grad(inst, u);
  double tracked = phi(inst, u);
  rep.energy_trace.push_back(tracked);
  rep.fiber_history.push_back(s);

  Field w_prev, grad_prev;
  bool have_prev = false;
  double eta_prev = 0.0;
  double last_step = 0.0;
  double last_rel_change = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();
  int quiet = 0;
  int iter = 0;

  for (;;) {
    const double residual = G.cwiseAbs().maxCoeff();
    const double norm_pow = e_norm_pow(inst, u);
    const double defect = nehari_defect(inst, u);
    rep.max_norm = std::max(rep.max_norm, std::pow(norm_pow, 1.0 / p));
    rep.trace.push_back({iter, tracked, residual, last_step});

    if (iter > 0) {
      if (last_rel_change < cfg.tol_energy && residual >= best_residual)
        ++quiet;
      else
        quiet = 0;
    }
    best_residual = std::min(best_residual, residual);

    if (residual <= cfg.tol_residual && std::abs(defect) <= cfg.tol_residual * (1.0 + norm_pow)) {
      rep.status = SolveStatus::Converged;
      break;
    }
    if (quiet >= cfg.stall_window) {
      rep.status = SolveStatus::Stalled;
      rep.message = "relative energy change below tol_energy without residual progress";
      break;
    }
    if (iter >= cfg.max_iters) {
      rep.status = SolveStatus::MaxIters;
      break;
    }

    const Field grad = s * G;
    const double g2 = grad.squaredNorm();
    double eta = std::min(1.0, 1.0 / std::sqrt(g2));
    if (have_prev) {
      const Field dw = w - w_prev;
      const double sy = dw.dot(grad - grad_prev);
      eta = sy > 0.0 ? dw.squaredNorm() / sy : 2.0 * eta_prev;
    }
    eta = std::clamp(eta, 1e-300, 1e6);

    bool accepted = false;
    Field w_try, u_try;
    double delta = 0.0;
    FiberResult fr_try;
    for (int b = 0; b <= cfg.armijo.max_backtracks; ++b, eta *= cfg.armijo.backtrack) {
      w_try = w - eta * grad;
      if (w_try.cwiseAbs().maxCoeff() == 0.0) continue;
      try {
        fr_try = fiber_scalar(inst, w_try, cfg.fiber);
      } catch (const FiberError&) {
        continue;
      }
      u_try = fr_try.s * w_try;
      delta = phi_increment(inst, u, u_try - u);
      if (delta <= -cfg.armijo.c1 * eta * g2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = SolveStatus::Stalled;
      rep.message = "line search exhausted its backtracks";
      break;
    }

    w_prev = w;
    grad_prev = grad;
    have_prev = true;
    eta_prev = eta;
    last_step = eta;
    w = std::move(w_try);
    s = fr_try.s;
    u = std::move(u_try);
    G = phi_grad(inst, u);
    tracked += delta;
    rep.decrements.push_back(delta);
    last_rel_change = std::abs(delta) / std::max(std::abs(tracked), 1e-300);
    rep.energy_trace.push_back(tracked);
    ++iter;

    if (cfg.renormalize_every > 0 && iter % cfg.renormalize_every == 0) {
      // Ψ̂ is scale invariant: u stays put, the gradient scales inversely
      const double c = e_norm(inst, w);
      w /= c;
      s *= c;
      w_prev /= c;
      grad_prev *= c;
    }
    rep.fiber_history.push_back(s);
  }

  rep.iterations = iter;
  rep.minimizer = u;
  rep.energy = phi(inst, u);
  rep.residual = G.cwiseAbs().maxCoeff();
  rep.nehari_defect = nehari_defect(inst, u);
  rep.norm_ceiling_exceeded = rep.max_norm > cfg.norm_ceiling;
  return rep;
}

Field translation_normalize(const ProblemInstance& inst, const Field& u) {
  const LatticeBox& box = inst.box();
  if (box.boundary() != Boundary::Torus)
    throw std::invalid_argument("translation normalization requires a torus box");
  if (u.size() != inst.size()) throw std::invalid_argument("field length does not match box");
  Index peak = 0;
  for (Index i = 1; i < u.size(); ++i)
    if (std::abs(u[i]) > std::abs(u[peak])) peak = i;
  const Coords z = box.coords_of(peak);
  const Index T = inst.period();
  Coords k(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) k[i] = z[i] / T;
  return translate_field(box, u, k, T);
}

Field read_field_csv(const LatticeBox& box, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open field file '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  Field u = Field::Zero(box.vertex_count());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != box.dim() + 1)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(box.dim() + 1) + " columns");
    Coords c(box.dim());
    for (int i = 0; i < box.dim(); ++i) c[i] = std::stoll(cells[i]);
    u[box.index_of(c)] = std::stod(cells.back());
  }
  return u;
}

Field make_seed(const ProblemInstance& inst, const Seed& seed) {
  const LatticeBox& box = inst.box();
  switch (seed.kind) {
    case Seed::Kind::Delta: {
      Coords c = seed.vertex;
      if (c.empty())
        for (Index L : box.sides()) c.push_back(L / 2);
      Field u = Field::Zero(box.vertex_count());
      u[box.index_of(c)] = 1.0;
      return u;
    }
    case Seed::Kind::Constant:
      return Field::Constant(box.vertex_count(), seed.value);
    case Seed::Kind::RandomGaussian: {
      Rng rng(seed.rng_seed);
      Field u(box.vertex_count());
      for (Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
      return u;
    }
    case Seed::Kind::File:
      return read_field_csv(box, seed.path);
  }
  throw std::invalid_argument("unknown seed kind");
}

unsigned thread_count() {
  if (const char* env = std::getenv("NEHARI_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

MultistartResult multistart(const ProblemInstance& inst, const SolverConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("multistart needs at least one seed");
  cfg.validate();

  const std::size_t n = cfg.seeds.size();
  MultistartResult out;
  out.runs.resize(n);

  auto run_one = [&](std::size_t i) {
    SolveReport& rep = out.runs[i];
    try {
      rep = minimize(inst, cfg, make_seed(inst, cfg.seeds[i]));
      if (cfg.translation_normalize && inst.box().boundary() == Boundary::Torus)
        rep.minimizer = translation_normalize(inst, rep.minimizer);
    } catch (const std::exception& e) {
      rep = SolveReport{};
      rep.status = SolveStatus::Stalled;
      rep.energy = std::numeric_limits<double>::infinity();
      rep.residual = std::numeric_limits<double>::infinity();
      rep.message = e.what();
    }
    rep.seed_id = cfg.seeds[i].id();
  };

  const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) run_one(i);
      });
    for (auto& th : pool) th.join();
  }

  auto better = [&](std::size_t a, std::size_t b) { return out.runs[a].energy < out.runs[b].energy; };
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i)
    if (out.runs[i].converged() && (best == n || better(i, best))) best = i;
  if (best == n) {
    best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (better(i, best)) best = i;
  }
  out.best_index = best;
  out.best = out.runs[best];
  return out;
}

}  // namespace nehari
