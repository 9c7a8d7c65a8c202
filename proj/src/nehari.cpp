#include "nehari/nehari.hpp"

#include <cmath>
#include <vector>

#include "nehari/summation.hpp"

namespace nehari {

namespace {

constexpr double kMinScale = 1e-30;
constexpr double kMaxScale = 1e30;

void require_direction(const ProblemInstance& inst, const Field& w) {
  if (w.size() != inst.size()) throw std::invalid_argument("direction length does not match box");
  if (w.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("direction must be nonzero");
}

/// θ_w with ‖w‖^p computed once.
class Theta {
 public:
  Theta(const ProblemInstance& inst, const Field& w)
      : inst_(inst), w_(w), norm_pow_(e_norm_pow(inst, w)), terms_(w.size()) {}

  double norm_pow() const { return norm_pow_; }

  double operator()(double s) {
    for (Index i = 0; i < w_.size(); ++i) terms_[i] = w_[i] == 0.0 ? 0.0 : inst_.f(i, s * w_[i]) * w_[i];
    const double pairing = deterministic_sum(std::span<const double>(terms_));
    return norm_pow_ - std::pow(s, 1.0 - inst_.p()) * pairing;
  }

 private:
  const ProblemInstance& inst_;
  const Field& w_;
  double norm_pow_;
  std::vector<double> terms_;
};

}  // namespace

double theta(const ProblemInstance& inst, const Field& w, double s) {
  require_direction(inst, w);
  if (!(s > 0.0)) throw std::invalid_argument("fiber scale must be positive");
  return Theta(inst, w)(s);
}

double closed_form_fiber_scalar(const ProblemInstance& inst, const Field& w) {
  const Nonlinearity& nl = inst.nonlinearity();
  if (nl.kind() != NonlinearityKind::PurePower)
    throw std::invalid_argument("closed-form fiber scalar needs a pure-power nonlinearity");
  require_direction(inst, w);
  const double p = inst.p(), q = nl.q();
  std::vector<double> t(w.size());
  for (Index i = 0; i < w.size(); ++i) t[i] = inst.coefficients(i)[0] * std::pow(std::abs(w[i]), q);
  const double top = e_norm_pow(inst, w);
  const double bottom = deterministic_sum(std::span<const double>(t));
  return std::pow(top / bottom, 1.0 / (q - p));
}

FiberResult fiber_scalar(const ProblemInstance& inst, const Field& w, const FiberOptions& opts) {
  require_direction(inst, w);
  Theta th(inst, w);
  FiberResult r;

  if (opts.closed_form && inst.nonlinearity().kind() == NonlinearityKind::PurePower) {
    r.s = closed_form_fiber_scalar(inst, w);
    r.theta_at_s = th(r.s);
    // θ is exactly linear in s^(q-p) here; widen until rounding cannot
    // flip the signs at the bracket ends
    for (double rel = 1e-12; rel < 1.0; rel *= 10.0) {
      r.s_lo = r.s * (1.0 - rel);
      r.s_hi = r.s * (1.0 + rel);
      if (th(r.s_lo) > 0.0 && th(r.s_hi) < 0.0) break;
    }
    return r;
  }

  const double target = opts.theta_rtol * th.norm_pow();
  double lo = 1.0, hi = 1.0;
  double t = th(1.0);
  if (t == 0.0) {
    r.s = r.s_lo = r.s_hi = 1.0;
    return r;
  }
  int steps = 0;
  if (t > 0.0) {
    hi = 2.0;
    while ((t = th(hi)) >= 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++steps >= opts.max_expansions || hi > kMaxScale)
        throw FiberError("fiber bracket expansion exhausted: theta stays positive up to s = " +
                         std::to_string(hi));
    }
  } else {
    lo = 0.5;
    while ((t = th(lo)) <= 0.0) {
      hi = lo;
      lo *= 0.5;
      if (++steps >= opts.max_expansions || lo < kMinScale)
        throw FiberError("fiber bracket expansion exhausted: theta stays negative down to s = " +
                         std::to_string(lo));
    }
  }
  r.iterations = steps;

  // bisection to a coarse bracket
  double s = 0.5 * (lo + hi);
  while (hi - lo > 1e-3 * hi && r.iterations < opts.max_iterations) {
    s = 0.5 * (lo + hi);
    t = th(s);
    ++r.iterations;
    if (t == 0.0) {
      lo = hi = s;
      break;
    }
    (t > 0.0 ? lo : hi) = s;
  }

  // safeguarded Newton polish
  s = 0.5 * (lo + hi);
  t = th(s);
  while (std::abs(t) > target && hi - lo > opts.s_rtol * s && r.iterations < opts.max_iterations) {
    ++r.iterations;
    (t > 0.0 ? lo : hi) = s;
    const double h = 1e-6 * s;
    const double slope = (th(s + h) - th(s - h)) / (2.0 * h);
    double next = 0.5 * (lo + hi);
    if (std::isfinite(slope) && slope < 0.0) {
      const double cand = s - t / slope;
      if (cand > lo && cand < hi) next = cand;
    }
    s = next;
    t = th(s);
  }
  if (t > 0.0) lo = std::max(lo, s);
  if (t < 0.0) hi = std::min(hi, s);
  r.s = s;
  r.theta_at_s = t;
  r.s_lo = lo;
  r.s_hi = hi;
  return r;
}

Field project(const ProblemInstance& inst, const Field& w, const FiberOptions& opts) {
  return fiber_scalar(inst, w, opts).s * w;
}

double psi(const ProblemInstance& inst, const Field& w, const FiberOptions& opts) {
  return phi(inst, project(inst, w, opts));
}

Field psi_grad(const ProblemInstance& inst, const Field& w, const FiberOptions& opts) {
  const double s = fiber_scalar(inst, w, opts).s;
  return s * phi_grad(inst, s * w);
}

}  // namespace nehari
