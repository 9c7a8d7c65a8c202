#include "nehari/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "nehari/summation.hpp"

namespace nehari {

namespace {

Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::string format_coords(std::span<const Index> c) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
  os << ']';
  return os.str();
}

/// Row-major coordinates of cell site `s` in [0,T)^N.
std::vector<Index> cell_coords(Index s, int dim, Index period) {
  std::vector<Index> c(dim);
  for (int i = dim - 1; i >= 0; --i) {
    c[i] = s % period;
    s /= period;
  }
  return c;
}

// 4-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 4> kGaussNodes = {
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights = {
    0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

}  // namespace

// ---------------------------------------------------------------------------
// PeriodicSamples

PeriodicSamples::PeriodicSamples(int dim, Index period, std::vector<double> samples)
    : dim_(dim), period_(period), samples_(std::move(samples)) {
  if (dim_ < 1) throw std::invalid_argument("periodic samples need dim >= 1");
  if (period_ < 1) throw std::invalid_argument("period must be positive");
  const Index expected = ipow(period_, dim_);
  if (static_cast<Index>(samples_.size()) != expected) {
    // a single value is accepted as a constant field of any period
    if (samples_.size() != 1) {
      throw std::invalid_argument("expected " + std::to_string(expected) +
                                  " samples for period " + std::to_string(period_) +
                                  " in dimension " + std::to_string(dim_) + ", got " +
                                  std::to_string(samples_.size()));
    }
  }
  for (double v : samples_)
    if (!std::isfinite(v)) throw std::invalid_argument("samples must be finite");
}

PeriodicSamples PeriodicSamples::constant(int dim, double value) {
  return PeriodicSamples(dim, 1, {value});
}

Index PeriodicSamples::site_of(std::span<const Index> coords) const {
  if (static_cast<int>(coords.size()) != dim_)
    throw std::invalid_argument("coordinate length does not match sample dimension");
  if (is_constant()) return 0;
  Index s = 0;
  for (Index c : coords) {
    Index r = c % period_;
    if (r < 0) r += period_;
    s = s * period_ + r;
  }
  return s;
}

double PeriodicSamples::min() const { return *std::min_element(samples_.begin(), samples_.end()); }
double PeriodicSamples::max() const { return *std::max_element(samples_.begin(), samples_.end()); }

// ---------------------------------------------------------------------------
// Nonlinearity

std::string_view to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::PurePower: return "pure-power";
    case NonlinearityKind::PowerSum: return "power-sum";
    case NonlinearityKind::CustomTable: return "custom-table";
  }
  return "?";
}

NonlinearityKind nonlinearity_kind_from_string(std::string_view name) {
  if (name == "pure-power") return NonlinearityKind::PurePower;
  if (name == "power-sum") return NonlinearityKind::PowerSum;
  if (name == "custom-table") return NonlinearityKind::CustomTable;
  throw std::invalid_argument("unknown nonlinearity kind '" + std::string(name) + "'");
}

Nonlinearity Nonlinearity::pure_power(double p, double q, PeriodicSamples b) {
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::PurePower;
  nl.p_ = p;
  nl.q_ = q;
  nl.terms_.push_back({q, std::move(b)});
  nl.a_ = nl.terms_.front().coefficient.max();
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  return nl;
}

Nonlinearity Nonlinearity::power_sum(double p, std::vector<PowerTerm> terms) {
  if (terms.empty()) throw std::invalid_argument("power-sum needs at least one term");
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  const int dim = terms.front().coefficient.dim();
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::PowerSum;
  nl.p_ = p;
  nl.q_ = -std::numeric_limits<double>::infinity();
  nl.a_ = 0.0;
  for (const auto& t : terms) {
    if (t.coefficient.dim() != dim)
      throw std::invalid_argument("coefficient fields must share one dimension");
    nl.q_ = std::max(nl.q_, t.exponent);
    // |u|^(q_j-1) <= 1 + |u|^(q-1) for q_j <= q
    nl.a_ += std::max(t.coefficient.max(), 0.0);
  }
  nl.terms_ = std::move(terms);
  return nl;
}

Nonlinearity Nonlinearity::custom_table(double p, double q, RatioTable positive,
                                        RatioTable negative, PeriodicSamples b) {
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  for (const RatioTable* t : {&positive, &negative}) {
    if (t->knots.empty() || t->knots.size() != t->ratios.size())
      throw std::invalid_argument("ratio table needs matching, non-empty knots and ratios");
    double prev = 0.0;
    for (double k : t->knots) {
      if (!(k > prev) || !std::isfinite(k))
        throw std::invalid_argument("ratio table knots must be positive and strictly increasing");
      prev = k;
    }
    for (double r : t->ratios)
      if (!std::isfinite(r)) throw std::invalid_argument("ratio table values must be finite");
  }
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::CustomTable;
  nl.p_ = p;
  nl.q_ = q;
  nl.pos_ = std::move(positive);
  nl.neg_ = std::move(negative);
  nl.terms_.push_back({q, std::move(b)});
  nl.build_cache();

  // sampled sup of |f| / (1 + |u|^(q-1)); the tail ratio is constant past
  // the last knot, so the grid bound carries over with a small margin
  double a = 0.0;
  const double bmax = nl.terms_.front().coefficient.max();
  const std::array<double, 1> unit = {1.0};
  for (double m : log_grid(1e-8, 1e8, 20)) {
    for (double u : {m, -m})
      a = std::max(a, std::abs(nl.f(unit, u)) / (1.0 + std::pow(m, q - 1.0)));
  }
  nl.a_ = 1.01 * a * std::max(bmax, 0.0);
  return nl;
}

void Nonlinearity::build_cache() {
  auto fill = [this](const RatioTable& t, std::vector<double>& cache) {
    cache.assign(t.knots.size(), 0.0);
    double k0 = 0.0, h0 = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < t.knots.size(); ++i) {
      const double k1 = t.knots[i], h1 = t.ratios[i];
      const double beta = (h1 - h0) / (k1 - k0);
      const double alpha = h0 - beta * k0;
      acc += alpha * (std::pow(k1, p_) - std::pow(k0, p_)) / p_ +
             beta * (std::pow(k1, p_ + 1.0) - std::pow(k0, p_ + 1.0)) / (p_ + 1.0);
      cache[i] = acc;
      k0 = k1;
      h0 = h1;
    }
  };
  fill(pos_, pos_cache_);
  fill(neg_, neg_cache_);
}

void Nonlinearity::set_growth_constant(double a) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("growth constant a must be positive");
  a_ = a;
}

std::size_t Nonlinearity::coefficient_count() const { return terms_.size(); }

const PeriodicSamples& Nonlinearity::coefficient(std::size_t j) const { return terms_.at(j).coefficient; }

Index Nonlinearity::period() const {
  Index T = 1;
  for (const auto& t : terms_) T = std::lcm(T, t.coefficient.period());
  return T;
}

std::vector<double> Nonlinearity::coefficients_at(std::span<const Index> coords) const {
  std::vector<double> b;
  b.reserve(terms_.size());
  for (const auto& t : terms_) b.push_back(t.coefficient.at(coords));
  return b;
}

double Nonlinearity::table_ratio(const RatioTable& t, double r) const {
  const auto& k = t.knots;
  if (r >= k.back()) return t.ratios.back() * std::pow(r / k.back(), q_ - p_);
  const auto it = std::upper_bound(k.begin(), k.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - k.begin());
  const double k0 = i == 0 ? 0.0 : k[i - 1];
  const double h0 = i == 0 ? 0.0 : t.ratios[i - 1];
  return h0 + (t.ratios[i] - h0) * (r - k0) / (k[i] - k0);
}

double Nonlinearity::table_primitive(const RatioTable& t, const std::vector<double>& cache,
                                     double r) const {
  const auto& k = t.knots;
  if (r >= k.back()) {
    const double hk = t.ratios.back();
    return cache.back() + hk * std::pow(k.back(), p_ - q_) *
                              (std::pow(r, q_) - std::pow(k.back(), q_)) / q_;
  }
  const auto it = std::upper_bound(k.begin(), k.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - k.begin());
  const double k0 = i == 0 ? 0.0 : k[i - 1];
  const double h0 = i == 0 ? 0.0 : t.ratios[i - 1];
  const double base = i == 0 ? 0.0 : cache[i - 1];
  const double beta = (t.ratios[i] - h0) / (k[i] - k0);
  const double alpha = h0 - beta * k0;
  return base + alpha * (std::pow(r, p_) - std::pow(k0, p_)) / p_ +
         beta * (std::pow(r, p_ + 1.0) - std::pow(k0, p_ + 1.0)) / (p_ + 1.0);
}

double Nonlinearity::f(std::span<const double> b, double u) const {
  if (u == 0.0) return 0.0;
  if (kind_ == NonlinearityKind::CustomTable) {
    const double r = std::abs(u);
    const double h = u > 0 ? table_ratio(pos_, r) : table_ratio(neg_, r);
    return b[0] * h * signed_pow(u, p_);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < terms_.size(); ++j) s += b[j] * signed_pow(u, terms_[j].exponent);
  return s;
}

double Nonlinearity::F(std::span<const double> b, double u) const {
  if (u == 0.0) return 0.0;
  if (kind_ == NonlinearityKind::CustomTable) {
    const double r = std::abs(u);
    return b[0] * (u > 0 ? table_primitive(pos_, pos_cache_, r)
                         : table_primitive(neg_, neg_cache_, r));
  }
  const double m = std::abs(u);
  double s = 0.0;
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const double q = terms_[j].exponent;
    s += b[j] * std::pow(m, q) / q;
  }
  return s;
}

double Nonlinearity::F_increment(std::span<const double> b, double u, double delta) const {
  if (delta == 0.0) return 0.0;
  if (kind_ != NonlinearityKind::CustomTable) {
    double s = 0.0;
    for (std::size_t j = 0; j < terms_.size(); ++j) {
      const double q = terms_[j].exponent;
      s += b[j] * pow_abs_increment(u, delta, q) / q;
    }
    return s;
  }
  if (u != 0.0 && std::abs(delta) < 1e-3 * std::abs(u)) {
    const double mid = u + 0.5 * delta, half = 0.5 * delta;
    double s = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i)
      s += kGaussWeights[i] * f(b, mid + half * kGaussNodes[i]);
    return s * half;
  }
  return F(b, u + delta) - F(b, u);
}

void Nonlinearity::validate() const {
  if (!(p_ > 1.0)) throw ModelError("p must exceed 1");
  for (const auto& t : terms_) {
    if (!(t.exponent > p_)) {
      std::ostringstream os;
      os << "A1 violated: exponent q = " << t.exponent << " must exceed p = " << p_;
      throw ModelError(os.str());
    }
    if (t.coefficient.min() <= 0.0)
      throw ModelError("A2 violated: nonlinearity coefficients must be positive");
  }
  if (kind_ == NonlinearityKind::CustomTable) {
    for (const RatioTable* t : {&pos_, &neg_})
      for (double r : t->ratios)
        if (!(r > 0.0)) throw ModelError("A4 violated: table ratios must be positive");
  }
}

bool Nonlinearity::operator==(const Nonlinearity& other) const {
  return kind_ == other.kind_ && p_ == other.p_ && q_ == other.q_ && a_ == other.a_ &&
         terms_ == other.terms_ && pos_ == other.pos_ && neg_ == other.neg_;
}

double eval_f(const Nonlinearity& nl, std::span<const Index> coords, double u) {
  const auto b = nl.coefficients_at(coords);
  return nl.f(b, u);
}

double eval_F(const Nonlinearity& nl, std::span<const Index> coords, double u) {
  const auto b = nl.coefficients_at(coords);
  return nl.F(b, u);
}

// ---------------------------------------------------------------------------
// Sampled checks

std::vector<double> log_grid(double lo, double hi, int n_per_decade) {
  const double decades = std::log10(hi / lo);
  const int count = static_cast<int>(std::lround(decades * n_per_decade)) + 1;
  std::vector<double> g(count);
  for (int k = 0; k < count; ++k) g[k] = lo * std::pow(10.0, static_cast<double>(k) / n_per_decade);
  return g;
}

namespace {

/// Coefficient rows for every site of the nonlinearity's period cell.
struct SiteTable {
  std::vector<std::vector<Index>> coords;
  std::vector<std::vector<double>> coeffs;
};

SiteTable sites_of(const Nonlinearity& nl) {
  SiteTable t;
  const int dim = nl.coefficient(0).dim();
  const Index T = nl.period();
  const Index n = ipow(T, dim);
  for (Index s = 0; s < n; ++s) {
    t.coords.push_back(cell_coords(s, dim, T));
    t.coeffs.push_back(nl.coefficients_at(t.coords.back()));
  }
  return t;
}

constexpr double kTiny = 1e-300;

}  // namespace

bool growth_split_holds(const Nonlinearity& nl, double eps, double c_eps) {
  const double p = nl.p(), q = nl.q();
  const auto sites = sites_of(nl);
  for (const auto& b : sites.coeffs) {
    for (double m : log_grid(1e-8, 1e8, 10)) {
      const double rhs = eps * std::pow(m, p - 1.0) + c_eps * std::pow(m, q - 1.0);
      for (double u : {m, -m})
        if (std::abs(nl.f(b, u)) > rhs * (1.0 + 1e-12)) return false;
    }
  }
  return true;
}

double growth_split(const Nonlinearity& nl, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("growth split needs eps > 0");
  const double p = nl.p(), q = nl.q();
  double c = 0.0;
  if (nl.kind() == NonlinearityKind::CustomTable) {
    const auto sites = sites_of(nl);
    for (const auto& b : sites.coeffs)
      for (double m : log_grid(1e-8, 1e8, 10))
        for (double u : {m, -m}) {
          const double excess = std::abs(nl.f(b, u)) - eps * std::pow(m, p - 1.0);
          c = std::max(c, excess / std::pow(m, q - 1.0));
        }
    c = std::max(c * (1.0 + 1e-9), std::numeric_limits<double>::min());
  } else {
    // Split eps evenly over the lower terms; a middle exponent
    // r = theta (p-1) + (1-theta) (q-1) is bounded by weighted AM-GM, the
    // top exponent by its coefficient.
    std::size_t lower = 0;
    for (const auto& t : nl.terms()) lower += t.exponent < q;
    const double eps_j = eps / static_cast<double>(std::max<std::size_t>(lower, 1));
    for (const auto& t : nl.terms()) {
      const double bmax = t.coefficient.max();
      if (t.exponent >= q) {
        c += bmax;
        continue;
      }
      const double theta = (q - t.exponent) / (q - p);
      if (!(theta > 0.0 && theta < 1.0)) {
        c += bmax;  // exponent <= p: not splittable, let the grid check decide
        continue;
      }
      const double k = std::pow(bmax * std::pow(theta / eps_j, theta), 1.0 / (1.0 - theta));
      c += (1.0 - theta) * k;
    }
  }
  if (!growth_split_holds(nl, eps, c))
    throw ModelError("growth split constant failed grid verification");
  return c;
}

std::vector<OracleReport> check_assumptions(const Nonlinearity& nl, const Potential& V,
                                            double p, double tol) {
  std::vector<OracleReport> out;
  const auto sites = sites_of(nl);
  const auto grid = log_grid(1e-8, 1e8, 10);
  const double q = nl.q();

  auto witness = [&](std::size_t site, double u, const std::string& extra) {
    std::ostringstream os;
    os.precision(17);
    os << "site=" << format_coords(sites.coords[site]) << " u=" << u;
    if (!extra.empty()) os << ' ' << extra;
    return os.str();
  };

  // A1: q > p and |f| <= a (1 + |u|^(q-1))
  {
    OracleReport r{.name = "A1 growth bound", .tolerance = tol};
    r.note = "sampled on |u| in [1e-8,1e8], all cell sites";
    if (!(q > p) || std::abs(nl.p() - p) > 0.0) {
      std::ostringstream os;
      os << "q=" << q << " p=" << p << " nonlinearity p=" << nl.p();
      r.max_violation = std::numeric_limits<double>::infinity();
      r.witness = os.str();
    } else {
      const double a = nl.growth_constant();
      for (std::size_t s = 0; s < sites.coeffs.size(); ++s)
        for (double m : grid)
          for (double u : {m, -m}) {
            const double v = std::abs(nl.f(sites.coeffs[s], u)) / (a * (1.0 + std::pow(m, q - 1.0))) - 1.0;
            if (v > r.max_violation) {
              r.max_violation = v;
              r.witness = witness(s, u, "");
            }
          }
      if (r.max_violation <= tol) r.witness.reset();
    }
    r.pass = r.max_violation <= r.tolerance;
    out.push_back(std::move(r));
  }

  // A2: positive samples (V and coefficients); periodicity holds by storage
  {
    OracleReport r{.name = "A2 positivity and periodicity", .tolerance = 0.0};
    r.note = "violation counts non-positive samples";
    double bad = 0;
    for (std::size_t s = 0; s < V.samples().size(); ++s) {
      if (!(V.samples()[s] > 0.0)) {
        if (!r.witness) {
          std::ostringstream os;
          os << "V site " << format_coords(cell_coords(static_cast<Index>(s), V.dim(), V.period()))
             << " = " << V.samples()[s];
          r.witness = os.str();
        }
        ++bad;
      }
    }
    for (std::size_t j = 0; j < nl.coefficient_count(); ++j) {
      const auto& c = nl.coefficient(j);
      for (std::size_t s = 0; s < c.samples().size(); ++s)
        if (!(c.samples()[s] > 0.0)) {
          if (!r.witness) r.witness = "coefficient " + std::to_string(j) + " sample " + std::to_string(s);
          ++bad;
        }
    }
    if (V.dim() != nl.coefficient(0).dim()) {
      ++bad;
      r.witness = "potential and nonlinearity dimensions differ";
    }
    r.max_violation = bad;
    r.pass = bad == 0;
    out.push_back(std::move(r));
  }

  // Shortfall of a relative increase from lo to hi against the margin tol.
  auto shortfall = [tol](double lo, double hi) {
    const double scale = std::max({std::abs(lo), std::abs(hi), kTiny});
    return tol - (hi - lo) / scale;
  };

  // A3: |f|/|u|^(p-1) strictly decreasing towards 0 on the small-u tail
  {
    OracleReport r{.name = "A3 small-u decay", .max_violation = -std::numeric_limits<double>::infinity(),
                   .tolerance = 0.0};
    r.note = "ratio must shrink by a relative margin per grid step for |u| <= 1e-4";
    for (std::size_t s = 0; s < sites.coeffs.size(); ++s)
      for (double sign : {1.0, -1.0}) {
        double prev = 0.0;
        for (std::size_t k = 0; k < grid.size() && grid[k] <= 1e-4 * (1 + 1e-12); ++k) {
          const double u = sign * grid[k];
          const double rho = std::abs(nl.f(sites.coeffs[s], u)) / std::pow(grid[k], p - 1.0);
          if (k > 0) {
            const double v = shortfall(prev, rho);
            if (v > r.max_violation) {
              r.max_violation = v;
              if (v > 0) r.witness = witness(s, u, "ratio=" + std::to_string(rho));
            }
          }
          prev = rho;
        }
      }
    r.pass = r.max_violation <= r.tolerance;
    out.push_back(std::move(r));
  }

  // A4: f/|u|^(p-1) strictly increasing on each half line
  {
    OracleReport r{.name = "A4 monotone ratio", .max_violation = -std::numeric_limits<double>::infinity(),
                   .tolerance = 0.0};
    r.note = "ratio must increase by a relative margin per grid step on each half line";
    for (std::size_t s = 0; s < sites.coeffs.size(); ++s) {
      const auto& b = sites.coeffs[s];
      for (std::size_t k = 1; k < grid.size(); ++k) {
        const double rp0 = nl.f(b, grid[k - 1]) / std::pow(grid[k - 1], p - 1.0);
        const double rp1 = nl.f(b, grid[k]) / std::pow(grid[k], p - 1.0);
        // on (-inf, 0) increasing in u means decreasing in |u|
        const double rn0 = nl.f(b, -grid[k]) / std::pow(grid[k], p - 1.0);
        const double rn1 = nl.f(b, -grid[k - 1]) / std::pow(grid[k - 1], p - 1.0);
        for (auto [lo, hi, u] : {std::tuple{rp0, rp1, grid[k]}, std::tuple{rn0, rn1, -grid[k]}}) {
          const double v = shortfall(lo, hi);
          if (v > r.max_violation) {
            r.max_violation = v;
            if (v > 0) {
              std::ostringstream os;
              os.precision(17);
              os << "ratio " << lo << " -> " << hi;
              r.witness = witness(s, u, os.str());
            }
          }
        }
      }
    }
    r.pass = r.max_violation <= r.tolerance;
    out.push_back(std::move(r));
  }

  // A5: F/|u|^p strictly increasing on the large-u tail
  {
    OracleReport r{.name = "A5 superlinear primitive", .max_violation = -std::numeric_limits<double>::infinity(),
                   .tolerance = 0.0};
    r.note = "F/|u|^p must grow by a relative margin per grid step for |u| >= 1e4";
    for (std::size_t s = 0; s < sites.coeffs.size(); ++s)
      for (double sign : {1.0, -1.0}) {
        double prev = 0.0;
        bool first = true;
        for (double m : grid) {
          if (m < 1e4 * (1 - 1e-12)) continue;
          const double ratio = nl.F(sites.coeffs[s], sign * m) / std::pow(m, p);
          if (!first) {
            const double v = shortfall(prev, ratio);
            if (v > r.max_violation) {
              r.max_violation = v;
              if (v > 0) r.witness = witness(s, sign * m, "F/|u|^p=" + std::to_string(ratio));
            }
          }
          first = false;
          prev = ratio;
        }
      }
    r.pass = r.max_violation <= r.tolerance;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace nehari
