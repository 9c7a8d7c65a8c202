#include "nehari/functional.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "nehari/summation.hpp"

namespace nehari {

namespace {

void require_size(const ProblemInstance& inst, const Field& u) {
  if (u.size() != inst.size())
    throw std::invalid_argument("field length " + std::to_string(u.size()) +
                                " does not match box with " + std::to_string(inst.size()) +
                                " vertices");
}

double sum(const std::vector<double>& terms) {
  return deterministic_sum(std::span<const double>(terms));
}

/// Per-edge terms followed by per-half-edge terms, in box order.
template <typename EdgeFn, typename HalfFn>
std::vector<double> edge_terms(const LatticeBox& box, EdgeFn&& on_edge, HalfFn&& on_half) {
  std::vector<double> t;
  t.reserve(box.edges().size() + box.half_edges().size());
  for (const Edge& e : box.edges()) t.push_back(on_edge(e.a, e.b));
  for (Index v : box.half_edges()) t.push_back(on_half(v));
  return t;
}

}  // namespace

ProblemInstance::ProblemInstance(LatticeBox box, Potential V, Nonlinearity nl, double p)
    : box_(std::move(box)), V_(std::move(V)), nl_(std::move(nl)), p_(p) {
  if (!(p_ > 1.0) || !std::isfinite(p_)) throw ModelError("p must lie in (1, inf)");
  if (nl_.p() != p_) throw ModelError("nonlinearity p does not match instance p");
  nl_.validate();
  if (V_.min() <= 0.0) throw ModelError("A2 violated: potential samples must be positive");
  if (V_.dim() != box_.dim() || nl_.coefficient(0).dim() != box_.dim())
    throw ModelError("potential/coefficient dimension does not match the box");

  period_ = std::lcm(V_.period(), nl_.period());
  if (box_.boundary() == Boundary::Torus) {
    for (Index L : box_.sides()) {
      if (L % period_ != 0) {
        std::ostringstream os;
        os << "period must divide side: period " << period_ << " does not divide torus side " << L;
        throw ModelError(os.str());
      }
    }
  }

  const Index n = box_.vertex_count();
  ncoef_ = nl_.coefficient_count();
  v_values_.resize(n);
  coeffs_.resize(static_cast<std::size_t>(n) * ncoef_);
  for (Index v = 0; v < n; ++v) {
    const Coords c = box_.coords_of(v);
    v_values_[v] = V_.at(c);
    for (std::size_t j = 0; j < ncoef_; ++j) coeffs_[v * ncoef_ + j] = nl_.coefficient(j).at(c);
  }
}

Field p_laplacian(const ProblemInstance& inst, const Field& u) {
  require_size(inst, u);
  const double p = inst.p();
  Field out(u.size());
  for (Index x = 0; x < inst.size(); ++x) {
    double acc = 0.0;
    for (const NeighborSlot& s : inst.box().neighbors(x)) {
      const double uy = s.inside ? u[s.vertex] : 0.0;
      acc += signed_pow(uy - u[x], p);
    }
    out[x] = acc;
  }
  return out;
}

double dirichlet_energy(const ProblemInstance& inst, const Field& u) {
  require_size(inst, u);
  const double p = inst.p();
  return sum(edge_terms(
      inst.box(), [&](Index a, Index b) { return std::pow(std::abs(u[a] - u[b]), p); },
      [&](Index v) { return std::pow(std::abs(u[v]), p); }));
}

double lr_norm(const Field& u, double r) {
  if (std::isinf(r)) return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff();
  std::vector<double> t(static_cast<std::size_t>(u.size()));
  for (Index i = 0; i < u.size(); ++i) t[i] = std::pow(std::abs(u[i]), r);
  return std::pow(sum(t), 1.0 / r);
}

Norms norms(const ProblemInstance& inst, const Field& u) {
  require_size(inst, u);
  const double p = inst.p();
  const double energy = dirichlet_energy(inst, u);
  std::vector<double> plain(u.size()), weighted(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    plain[i] = std::pow(std::abs(u[i]), p);
    weighted[i] = inst.potential_values()[i] * plain[i];
  }
  const double lpp = sum(plain);
  return {std::pow(lpp, 1.0 / p), std::pow(energy + lpp, 1.0 / p),
          std::pow(energy + sum(weighted), 1.0 / p)};
}

double e_norm_pow(const ProblemInstance& inst, const Field& u) {
  require_size(inst, u);
  const double p = inst.p();
  std::vector<double> weighted(u.size());
  for (Index i = 0; i < u.size(); ++i)
    weighted[i] = inst.potential_values()[i] * std::pow(std::abs(u[i]), p);
  return dirichlet_energy(inst, u) + sum(weighted);
}

double e_norm(const ProblemInstance& inst, const Field& u) {
  return std::pow(e_norm_pow(inst, u), 1.0 / inst.p());
}

double phi(const ProblemInstance& inst, const Field& u) {
  require_size(inst, u);
  std::vector<double> prim(u.size());
  for (Index i = 0; i < u.size(); ++i) prim[i] = inst.F(i, u[i]);
  return e_norm_pow(inst, u) / inst.p() - sum(prim);
}

double phi_increment(const ProblemInstance& inst, const Field& u, const Field& du) {
  require_size(inst, u);
  require_size(inst, du);
  const double p = inst.p();
  std::vector<double> t = edge_terms(
      inst.box(),
      [&](Index a, Index b) { return pow_abs_increment(u[a] - u[b], du[a] - du[b], p); },
      [&](Index v) { return pow_abs_increment(u[v], du[v], p); });
  for (Index i = 0; i < u.size(); ++i)
    t.push_back(inst.potential_values()[i] * pow_abs_increment(u[i], du[i], p));
  const double norm_part = sum(t) / p;
  std::vector<double> prim(u.size());
  for (Index i = 0; i < u.size(); ++i)
    prim[i] = inst.nonlinearity().F_increment(inst.coefficients(i), u[i], du[i]);
  return norm_part - sum(prim);
}

Field phi_grad(const ProblemInstance& inst, const Field& u) {
  Field g = -p_laplacian(inst, u);
  const double p = inst.p();
  for (Index i = 0; i < u.size(); ++i)
    g[i] += inst.potential_values()[i] * signed_pow(u[i], p) - inst.f(i, u[i]);
  return g;
}

double norm_prime_pairing(const ProblemInstance& inst, const Field& w, const Field& v) {
  require_size(inst, w);
  require_size(inst, v);
  const double p = inst.p();
  std::vector<double> t = edge_terms(
      inst.box(),
      [&](Index a, Index b) { return signed_pow(w[a] - w[b], p) * (v[a] - v[b]); },
      [&](Index x) { return signed_pow(w[x], p) * v[x]; });
  for (Index i = 0; i < w.size(); ++i)
    t.push_back(inst.potential_values()[i] * signed_pow(w[i], p) * v[i]);
  return sum(t);
}

double phi_prime_pairing(const ProblemInstance& inst, const Field& u, const Field& v) {
  std::vector<double> t(u.size());
  const double np = norm_prime_pairing(inst, u, v);
  for (Index i = 0; i < u.size(); ++i) t[i] = inst.f(i, u[i]) * v[i];
  return np - sum(t);
}

double nehari_defect(const ProblemInstance& inst, const Field& u) {
  require_size(inst, u);
  std::vector<double> t(u.size());
  for (Index i = 0; i < u.size(); ++i) t[i] = inst.f(i, u[i]) * u[i];
  return e_norm_pow(inst, u) - sum(t);
}

double reduced_energy(const ProblemInstance& inst, const Field& u) {
  require_size(inst, u);
  const double p = inst.p();
  std::vector<double> t(u.size());
  for (Index i = 0; i < u.size(); ++i) t[i] = inst.f(i, u[i]) * u[i] / p - inst.F(i, u[i]);
  return sum(t);
}

double residual_inf(const ProblemInstance& inst, const Field& u) {
  return phi_grad(inst, u).cwiseAbs().maxCoeff();
}

}  // namespace nehari
