#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "helpers.hpp"

using namespace testing;

namespace {

const Index origin[] = {0};

Nonlinearity power_sum_3_5() {
  return Nonlinearity::power_sum(2.0, {{3.0, constant(1, 1.0)}, {5.0, constant(1, 2.0)}});
}

Nonlinearity sample_table(double p = 2.0, double q = 4.0) {
  RatioTable pos{{0.5, 1.0, 2.0}, {0.3, 1.0, 2.5}};
  RatioTable neg{{1.0, 3.0}, {0.5, 4.0}};
  return Nonlinearity::custom_table(p, q, pos, neg, constant(1, 1.5));
}

double quad_F(const Nonlinearity& nl, double u) {
  auto f = [&](double t) { return eval_f(nl, origin, t); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, u, 15, 1e-14);
}

}  // namespace

TEST_CASE("pure power values") {
  const auto nl = Nonlinearity::pure_power(2.0, 4.0, constant(1, 1.0));
  CHECK(eval_f(nl, origin, 2.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(eval_F(nl, origin, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(eval_f(nl, origin, 0.0) == 0.0);
  CHECK(eval_F(nl, origin, 0.0) == 0.0);
  CHECK(std::abs(quad_F(nl, 2.0) - 4.0) <= 1e-8);
}

TEST_CASE("power sum is odd") {
  const auto nl = power_sum_3_5();
  CHECK(eval_f(nl, origin, -1.0) == doctest::Approx(-3.0).epsilon(1e-15));
  for (double u : {0.1, 0.7, 3.0}) {
    CHECK(eval_f(nl, origin, -u) == -eval_f(nl, origin, u));
    CHECK(eval_F(nl, origin, -u) == eval_F(nl, origin, u));
  }
}

TEST_CASE("primitive matches quadrature of f") {
  for (const auto& nl : {Nonlinearity::pure_power(1.5, 3.5, constant(1, 2.0)), power_sum_3_5(), sample_table(),
                         sample_table(3.0, 4.5)}) {
    for (double u : {-5.0, -2.2, -0.9, -0.2, 0.1, 0.4, 0.75, 1.3, 2.0, 6.0}) {
      const double F = eval_F(nl, origin, u);
      CHECK(std::abs(F - quad_F(nl, u)) <= 1e-10 * std::max(1.0, std::abs(F)));
    }
  }
}

TEST_CASE("primitive increments agree with differences") {
  for (const auto& nl : {power_sum_3_5(), sample_table()}) {
    const auto b = nl.coefficients_at(std::span<const Index>(origin, 1));
    for (double u : {-2.5, -0.7, 0.3, 0.99, 1.7}) {
      for (double step : {1e-1, 1e-4, -1e-6, 1e-9}) {
        const double d = (u + step) - u;  // representable, so both sides integrate the same interval
        auto f = [&](double t) { return eval_f(nl, origin, t); };
        const double exact =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, u, u + d, 10, 1e-13);
        CHECK(std::abs(nl.F_increment(b, u, d) - exact) <= 1e-9 * std::abs(exact) + 1e-15);
      }
    }
  }
}

TEST_CASE("custom table interpolates the ratio") {
  const auto nl = sample_table();
  // h(0.75) = 0.3 + 0.25/0.5 * 0.7 = 0.65; f = 1.5 * h * u
  CHECK(eval_f(nl, origin, 0.75) == doctest::Approx(1.5 * 0.65 * 0.75).epsilon(1e-14));
  // below the first knot h is linear from 0
  CHECK(eval_f(nl, origin, 0.25) == doctest::Approx(1.5 * 0.15 * 0.25).epsilon(1e-14));
  // tail: h = 2.5 (r/2)^2
  CHECK(eval_f(nl, origin, 4.0) == doctest::Approx(1.5 * 10.0 * 4.0).epsilon(1e-14));
  // the negative half uses its own table
  CHECK(eval_f(nl, origin, -2.0) == doctest::Approx(-1.5 * 2.25 * 2.0).epsilon(1e-14));
}

TEST_CASE("growth split constants") {
  const auto pp = Nonlinearity::pure_power(2.0, 4.0, constant(1, 1.0));
  const double c = growth_split(pp, 0.1);
  CHECK(c == doctest::Approx(1.0));
  CHECK(growth_split_holds(pp, 0.1, 1.0));
  CHECK_THROWS_AS(growth_split(pp, 0.0), std::invalid_argument);

  const auto ps = power_sum_3_5();
  CHECK(growth_split_holds(ps, 1.0, 2.0 * 2));
  for (double eps : {1e-3, 0.1, 1.0, 10.0}) {
    const double ce = growth_split(ps, eps);
    CHECK(growth_split_holds(ps, eps, ce));
    // smaller eps never needs a smaller constant
    CHECK(ce >= growth_split(ps, eps * 10) * (1 - 1e-12));
  }
}

TEST_CASE("growth split is tight for a single lower term") {
  // |u|^2 <= eps |u| + C |u|^3 with optimal C = 1/(4 eps)
  const auto nl = Nonlinearity::power_sum(2.0, {{3.0, constant(1, 1.0)}, {4.0, constant(1, 1e-30)}});
  for (double eps : {0.01, 0.5, 2.0}) {
    const double c = growth_split(nl, eps);
    CHECK(c <= 1.0 / (4 * eps) * (1 + 1e-9) + 1e-30);
    CHECK_FALSE(growth_split_holds(nl, eps, 0.9 / (4 * eps)));
  }
}

TEST_CASE("assumptions hold for the built-in families") {
  for (const auto& nl : {Nonlinearity::pure_power(2.0, 4.0, constant(1, 1.0)), power_sum_3_5(), sample_table()}) {
    for (const auto& r : check_assumptions(nl, constant(1, 1.0), 2.0, 1e-9)) {
      INFO(r.name, " ", r.note);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("q = p fails A4 with a witness") {
  const auto nl = Nonlinearity::pure_power(2.0, 2.0, constant(1, 1.0));
  const auto reports = check_assumptions(nl, constant(1, 1.0), 2.0, 1e-9);
  REQUIRE(reports.size() == 5);
  CHECK_FALSE(reports[3].pass);
  CHECK(reports[3].name.find("A4") != std::string::npos);
  CHECK(reports[3].witness.has_value());
  CHECK_FALSE(reports[0].pass);
  CHECK_THROWS_AS(nl.validate(), ModelError);
}

TEST_CASE("non-positive potential sample fails A2") {
  const auto nl = Nonlinearity::pure_power(2.0, 4.0, constant(1, 1.0));
  const PeriodicSamples V(1, 3, {1.0, 0.0, 2.0});
  const auto reports = check_assumptions(nl, V, 2.0, 1e-9);
  CHECK_FALSE(reports[1].pass);
  CHECK(reports[1].witness.has_value());
  CHECK(reports[0].pass);
}

TEST_CASE("decreasing table ratio fails A4") {
  RatioTable pos{{1.0, 2.0}, {2.0, 1.0}};
  const auto nl = Nonlinearity::custom_table(2.0, 4.0, pos, pos, constant(1, 1.0));
  CHECK_FALSE(check_assumptions(nl, constant(1, 1.0), 2.0, 1e-9)[3].pass);
}

TEST_CASE("periodic samples") {
  const PeriodicSamples s(2, 2, {1, 2, 3, 4});
  const Index a[] = {3, -1}, b[] = {1, 1};
  CHECK(s.at(a) == 4.0);
  CHECK(s.at(b) == 4.0);
  CHECK(s.min() == 1.0);
  CHECK(s.max() == 4.0);
  CHECK_THROWS(PeriodicSamples(2, 2, {1, 2, 3}));
  const PeriodicSamples c(1, 3, {5.0});
  CHECK(c.is_constant());
  CHECK(c.period() == 3);
}

TEST_CASE("combined period is the lcm") {
  const auto nl = Nonlinearity::power_sum(
      2.0, {{3.0, PeriodicSamples(1, 2, {1, 2})}, {5.0, PeriodicSamples(1, 3, {1, 2, 3})}});
  CHECK(nl.period() == 6);
  const Index x[] = {5};
  const auto b = nl.coefficients_at(x);
  CHECK(b[0] == 2.0);
  CHECK(b[1] == 3.0);
}

TEST_CASE("kind names") {
  CHECK(nonlinearity_kind_from_string("power-sum") == NonlinearityKind::PowerSum);
  CHECK(to_string(NonlinearityKind::CustomTable) == "custom-table");
  CHECK_THROWS(nonlinearity_kind_from_string("cubic"));
}
