#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <boost/math/tools/roots.hpp>

#include "doctest.h"
#include "helpers.hpp"

using namespace testing;

namespace {

Field random_direction(Index n, Rng& rng) {
  Field w(n);
  for (Index i = 0; i < n; ++i) w[i] = rng.normal();
  return w;
}

ProblemInstance table_instance() {
  RatioTable pos{{0.5, 1.0, 2.0}, {0.3, 1.0, 2.5}};
  RatioTable neg{{1.0, 3.0}, {0.5, 4.0}};
  return ProblemInstance(LatticeBox({4, 4}, Boundary::Torus), constant(2, 1.2),
                         Nonlinearity::custom_table(2.0, 4.0, pos, neg, constant(2, 1.5)), 2.0);
}

ProblemInstance sum_instance(double p) {
  return ProblemInstance(
      LatticeBox({5, 5}, Boundary::DirichletZero), constant(2, 1.0),
      Nonlinearity::power_sum(p, {{p + 0.5, constant(2, 1.0)}, {p + 2.0, constant(2, 0.5)}}), p);
}

}  // namespace

TEST_CASE("theta on a delta") {
  const auto inst = pure_power({5, 5}, Boundary::DirichletZero, 2.0, 4.0);
  const Field w = delta(inst.box(), {2, 2});
  CHECK(theta(inst, w, 1.0) == doctest::Approx(4.0));
  CHECK(std::abs(theta(inst, w, std::sqrt(5.0))) <= 1e-13);
  CHECK_THROWS(theta(inst, Field::Zero(25), 1.0));
  CHECK_THROWS(theta(inst, w, 0.0));
}

TEST_CASE("theta is linear in s^(q-p) for a pure power") {
  Rng rng(2);
  const auto inst = pure_power({4, 4}, Boundary::Torus, 1.5, 3.2);
  const Field w = random_direction(inst.size(), rng);
  const double np = e_norm_pow(inst, w);
  const double lq = std::pow(lr_norm(w, 3.2), 3.2);
  for (double s : {0.1, 0.9, 4.0})
    CHECK(theta(inst, w, s) == doctest::Approx(np - std::pow(s, 1.7) * lq).epsilon(1e-12));
}

TEST_CASE("fiber scalar examples") {
  const auto inst = pure_power({5, 5}, Boundary::DirichletZero, 2.0, 4.0);
  const Field w = delta(inst.box(), {2, 2});
  FiberOptions general;
  general.closed_form = false;
  for (const auto& opts : {FiberOptions{}, general}) {
    CHECK(std::abs(fiber_scalar(inst, w, opts).s - std::sqrt(5.0)) <= 1e-10);
    CHECK(std::abs(fiber_scalar(inst, 2.0 * w, opts).s - std::sqrt(5.0) / 2) <= 1e-10);
  }
  CHECK(fiber_scalar(torus3(), Field::Ones(3)).s == doctest::Approx(1.0).epsilon(1e-14));
  const FiberResult r = fiber_scalar(inst, w, general);
  CHECK(r.s_lo <= r.s);
  CHECK(r.s <= r.s_hi);
  CHECK(theta(inst, w, r.s_lo) >= 0.0);
  CHECK(theta(inst, w, r.s_hi) <= 0.0);
}

TEST_CASE("general fiber path matches the closed form") {
  Rng rng(99);
  FiberOptions general;
  general.closed_form = false;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto inst = pure_power({5, 5}, Boundary::DirichletZero, p, p + 2);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const Field w = std::pow(10.0, rng.uniform(-3, 3)) * random_direction(inst.size(), rng);
      worst = std::max(worst, rel_diff(fiber_scalar(inst, w, general).s, closed_form_fiber_scalar(inst, w)));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("fiber scalar matches an independent bracketing root finder") {
  Rng rng(4);
  for (const auto& inst : {table_instance(), sum_instance(1.5), sum_instance(3.0)}) {
    for (int k = 0; k < 30; ++k) {
      const Field w = random_direction(inst.size(), rng);
      auto th = [&](double s) { return theta(inst, w, s); };
      double lo = 1.0, hi = 1.0;
      while (th(lo) <= 0) lo /= 2;
      while (th(hi) >= 0) hi *= 2;
      std::uintmax_t iters = 200;
      const auto [a, b] =
          boost::math::tools::toms748_solve(th, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
      CHECK(rel_diff(fiber_scalar(inst, w).s, 0.5 * (a + b)) <= 1e-10);
    }
  }
}

TEST_CASE("projection lands on the Nehari set") {
  const auto inst = pure_power({5, 5}, Boundary::DirichletZero, 2.0, 4.0);
  const Field w = delta(inst.box(), {2, 2});
  const Field u = project(inst, w);
  CHECK(u[inst.box().index_of(Coords{2, 2})] == doctest::Approx(std::sqrt(5.0)));
  CHECK(std::abs(nehari_defect(inst, u)) <= 1e-12 * e_norm_pow(inst, u));
  CHECK((project(torus3(), Field::Ones(3)) - Field::Ones(3)).cwiseAbs().maxCoeff() <= 1e-12);

  Rng rng(8);
  for (const auto& in : {table_instance(), sum_instance(2.0)}) {
    const Field v = random_direction(in.size(), rng);
    const Field a = project(in, v), b = project(in, 2.0 * v);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9 * a.cwiseAbs().maxCoeff());
    CHECK(std::abs(nehari_defect(in, a)) <= 1e-9 * e_norm_pow(in, a));
  }
}

TEST_CASE("projection restricted to the unit sphere is inverted by normalization") {
  Rng rng(12);
  const auto inst = sum_instance(2.0);
  double min_norm = INFINITY;
  for (int k = 0; k < 200; ++k) {
    Field w = random_direction(inst.size(), rng);
    w /= e_norm(inst, w);
    const Field u = project(inst, w);
    const double nu = e_norm(inst, u);
    min_norm = std::min(min_norm, nu);
    CHECK((u / nu - w).cwiseAbs().maxCoeff() <= 1e-12);
    // ‖m̂(w)‖ / ‖w‖ is the fiber scalar
    CHECK(rel_diff(nu, fiber_scalar(inst, w).s) <= 1e-12);
    // and m̂ is the identity on the Nehari set
    CHECK((project(inst, u) - u).cwiseAbs().maxCoeff() <= 1e-9 * u.cwiseAbs().maxCoeff());
  }
  // the Nehari set stays away from 0
  CHECK(min_norm > 0.1);
}

TEST_CASE("reduced energy values") {
  const auto inst = pure_power({5, 5}, Boundary::DirichletZero, 2.0, 4.0);
  const Field w = delta(inst.box(), {2, 2});
  CHECK(psi(inst, w) == doctest::Approx(6.25).epsilon(1e-14));
  CHECK(psi(torus3(), Field::Ones(3)) == doctest::Approx(0.75).epsilon(1e-14));
  Rng rng(6);
  for (const auto& in : {table_instance(), sum_instance(1.5), sum_instance(3.0)}) {
    const Field v = random_direction(in.size(), rng);
    CHECK(rel_diff(psi(in, 3.0 * v), psi(in, v)) <= 1e-10);
    CHECK(psi(in, v) > 0.0);
  }
}

TEST_CASE("reduced energy maximizes the fiber") {
  Rng rng(13);
  const auto inst = sum_instance(2.0);
  for (int k = 0; k < 20; ++k) {
    const Field w = random_direction(inst.size(), rng);
    const double s = fiber_scalar(inst, w).s;
    const double top = psi(inst, w);
    for (double t : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0}) CHECK(phi(inst, (t * s) * w) < top);
  }
}

TEST_CASE("reduced gradient is orthogonal to the ray and matches finite differences") {
  Rng rng(21);
  for (const auto& inst : {table_instance(), sum_instance(2.0), sum_instance(3.0)}) {
    const Field w = random_direction(inst.size(), rng);
    const Field g = psi_grad(inst, w);
    CHECK(std::abs(g.dot(w)) <= 1e-9 * g.cwiseAbs().maxCoeff() * w.cwiseAbs().sum());
    const Field z = random_direction(inst.size(), rng).normalized();
    const double h = 1e-5;
    const double fd = (psi(inst, w + h * z) - psi(inst, w - h * z)) / (2 * h);
    CHECK(std::abs(fd - g.dot(z)) <= 1e-6 * std::max(1.0, std::abs(g.dot(z))));
  }
}

TEST_CASE("s_w is the reduced-gradient prefactor") {
  Rng rng(17);
  const auto inst = sum_instance(2.0);
  const Field w = random_direction(inst.size(), rng);
  const double s = fiber_scalar(inst, w).s;
  CHECK((psi_grad(inst, w) - s * phi_grad(inst, s * w)).cwiseAbs().maxCoeff() == 0.0);
}
