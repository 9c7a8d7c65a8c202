#pragma once

#include <cmath>

#include "nehari/oracle.hpp"
#include "nehari/solver.hpp"

namespace testing {

using namespace nehari;

inline PeriodicSamples constant(int dim, double v) { return PeriodicSamples::constant(dim, v); }

inline ProblemInstance pure_power(std::vector<Index> sides, Boundary bc, double p, double q,
                                  double lambda = 1.0, double b = 1.0) {
  const int dim = static_cast<int>(sides.size());
  return ProblemInstance(LatticeBox(std::move(sides), bc), constant(dim, lambda),
                         Nonlinearity::pure_power(p, q, constant(dim, b)), p);
}

inline ProblemInstance torus3() { return pure_power({3}, Boundary::Torus, 2.0, 4.0); }

inline Field delta(const LatticeBox& box, const Coords& at) {
  Field u = Field::Zero(box.vertex_count());
  u[box.index_of(at)] = 1.0;
  return u;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
