#include "nehari/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nehari {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

/// Rejects keys outside `allowed` so typos never pass silently.
void only_keys(const json& obj, const std::string& key, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(key, "expected an object");
  for (const auto& [k, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) fail(key + "." + k, "unknown key");
  }
}

double get_number(const json& obj, const std::string& key, const char* name) {
  if (!obj.contains(name)) fail(key + "." + name, "missing");
  const json& v = obj.at(name);
  if (!v.is_number()) fail(key + "." + name, "expected a number");
  return v.get<double>();
}

double get_number_or(const json& obj, const std::string& key, const char* name, double fallback) {
  return obj.contains(name) ? get_number(obj, key, name) : fallback;
}

long long get_int(const json& obj, const std::string& key, const char* name) {
  if (!obj.contains(name)) fail(key + "." + name, "missing");
  const json& v = obj.at(name);
  if (!v.is_number_integer()) fail(key + "." + name, "expected an integer");
  return v.get<long long>();
}

long long get_int_or(const json& obj, const std::string& key, const char* name, long long fallback) {
  return obj.contains(name) ? get_int(obj, key, name) : fallback;
}

std::string get_string(const json& obj, const std::string& key, const char* name) {
  if (!obj.contains(name)) fail(key + "." + name, "missing");
  const json& v = obj.at(name);
  if (!v.is_string()) fail(key + "." + name, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& key) {
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<Index> index_list(const json& v, const std::string& key) {
  if (!v.is_array()) fail(key, "expected an array of integers");
  std::vector<Index> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) fail(key + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back(v[i].get<Index>());
  }
  return out;
}

/// {"constant": x}, {"samples": [...]}, or a bare number.
PeriodicSamples periodic(const json& v, const std::string& key, int dim, Index period) {
  try {
    if (v.is_number()) return PeriodicSamples(dim, period, {v.get<double>()});
    only_keys(v, key, {"constant", "samples"});
    if (v.contains("constant") == v.contains("samples"))
      fail(key, "give exactly one of 'constant' or 'samples'");
    if (v.contains("constant")) return PeriodicSamples(dim, period, {get_number(v, key, "constant")});
    return PeriodicSamples(dim, period, number_list(v.at("samples"), key + ".samples"));
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

json periodic_json(const PeriodicSamples& s) {
  if (s.is_constant()) return json{{"constant", s.samples().front()}};
  return json{{"samples", s.samples()}};
}

RatioTable ratio_table(const json& v, const std::string& key) {
  if (!v.is_array()) fail(key, "expected an array of [u, ratio] pairs");
  RatioTable t;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string k = key + "[" + std::to_string(i) + "]";
    const auto pair = number_list(v[i], k);
    if (pair.size() != 2) fail(k, "expected [u, ratio]");
    t.knots.push_back(pair[0]);
    t.ratios.push_back(pair[1]);
  }
  return t;
}

json ratio_table_json(const RatioTable& t) {
  json out = json::array();
  for (std::size_t i = 0; i < t.knots.size(); ++i) out.push_back({t.knots[i], t.ratios[i]});
  return out;
}

Seed parse_seed(const json& v, const std::string& key) {
  only_keys(v, key, {"kind", "vertex", "value", "seed", "path"});
  Seed s;
  const std::string kind = get_string(v, key, "kind");
  if (kind == "delta") {
    s.kind = Seed::Kind::Delta;
    if (v.contains("vertex")) s.vertex = index_list(v.at("vertex"), key + ".vertex");
  } else if (kind == "constant") {
    s.kind = Seed::Kind::Constant;
    s.value = get_number_or(v, key, "value", 1.0);
  } else if (kind == "random-gaussian") {
    s.kind = Seed::Kind::RandomGaussian;
    if (!v.contains("seed") || !v.at("seed").is_number_unsigned())
      fail(key + ".seed", "expected a non-negative integer");
    s.rng_seed = v.at("seed").get<std::uint64_t>();
  } else if (kind == "file") {
    s.kind = Seed::Kind::File;
    s.path = get_string(v, key, "path");
  } else {
    fail(key + ".kind", "unknown seed kind '" + kind + "'");
  }
  return s;
}

json seed_json(const Seed& s) {
  switch (s.kind) {
    case Seed::Kind::Delta: {
      json out{{"kind", "delta"}};
      if (!s.vertex.empty()) out["vertex"] = s.vertex;
      return out;
    }
    case Seed::Kind::Constant: return {{"kind", "constant"}, {"value", s.value}};
    case Seed::Kind::RandomGaussian: return {{"kind", "random-gaussian"}, {"seed", s.rng_seed}};
    case Seed::Kind::File: return {{"kind", "file"}, {"path", s.path}};
  }
  return {};
}

std::vector<Seed> default_seeds() {
  Seed delta;
  Seed constant;
  constant.kind = Seed::Kind::Constant;
  Seed random;
  random.kind = Seed::Kind::RandomGaussian;
  random.rng_seed = 1;
  return {delta, constant, random};
}

void parse_instance(const json& v, RunConfig& cfg) {
  const std::string key = "instance";
  only_keys(v, key, {"dim", "sides", "bc", "p", "period", "potential", "nonlinearity"});
  cfg.dim = static_cast<int>(get_int(v, key, "dim"));
  if (cfg.dim < 1) fail(key + ".dim", "must be >= 1");
  if (!v.contains("sides")) fail(key + ".sides", "missing");
  cfg.sides = index_list(v.at("sides"), key + ".sides");
  if (static_cast<int>(cfg.sides.size()) != cfg.dim) fail(key + ".sides", "length must equal dim");
  try {
    cfg.bc = boundary_from_string(get_string(v, key, "bc"));
  } catch (const std::invalid_argument& e) {
    fail(key + ".bc", e.what());
  }
  cfg.p = get_number(v, key, "p");
  if (!(cfg.p > 1.0)) fail(key + ".p", "must exceed 1");
  cfg.period = get_int_or(v, key, "period", 1);
  if (cfg.period < 1) fail(key + ".period", "must be positive");

  if (!v.contains("potential")) fail(key + ".potential", "missing");
  cfg.potential = periodic(v.at("potential"), key + ".potential", cfg.dim, cfg.period);

  const std::string nk = key + ".nonlinearity";
  if (!v.contains("nonlinearity")) fail(nk, "missing");
  const json& n = v.at("nonlinearity");
  only_keys(n, nk, {"kind", "exponents", "coefficients", "a", "table"});
  NonlinearityKind kind;
  try {
    kind = nonlinearity_kind_from_string(get_string(n, nk, "kind"));
  } catch (const std::invalid_argument& e) {
    fail(nk + ".kind", e.what());
  }
  if (!n.contains("exponents")) fail(nk + ".exponents", "missing");
  const auto exps = number_list(n.at("exponents"), nk + ".exponents");
  std::vector<PeriodicSamples> coeffs;
  if (n.contains("coefficients")) {
    const json& c = n.at("coefficients");
    if (!c.is_array()) fail(nk + ".coefficients", "expected an array");
    for (std::size_t i = 0; i < c.size(); ++i)
      coeffs.push_back(periodic(c[i], nk + ".coefficients[" + std::to_string(i) + "]", cfg.dim, cfg.period));
  } else {
    coeffs.assign(exps.size(), PeriodicSamples(cfg.dim, cfg.period, {1.0}));
  }
  if (exps.empty()) fail(nk + ".exponents", "must not be empty");
  if (coeffs.size() != exps.size()) fail(nk + ".coefficients", "need one coefficient per exponent");

  switch (kind) {
    case NonlinearityKind::PurePower:
      if (exps.size() != 1) fail(nk + ".exponents", "pure-power takes exactly one exponent");
      cfg.nonlinearity = Nonlinearity::pure_power(cfg.p, exps[0], coeffs[0]);
      break;
    case NonlinearityKind::PowerSum: {
      std::vector<PowerTerm> terms;
      for (std::size_t j = 0; j < exps.size(); ++j) terms.push_back({exps[j], coeffs[j]});
      cfg.nonlinearity = Nonlinearity::power_sum(cfg.p, std::move(terms));
      break;
    }
    case NonlinearityKind::CustomTable: {
      if (exps.size() != 1) fail(nk + ".exponents", "custom-table takes one tail exponent");
      const std::string tk = nk + ".table";
      if (!n.contains("table")) fail(tk, "missing");
      only_keys(n.at("table"), tk, {"positive", "negative"});
      if (!n.at("table").contains("positive")) fail(tk + ".positive", "missing");
      if (!n.at("table").contains("negative")) fail(tk + ".negative", "missing");
      try {
        cfg.nonlinearity = Nonlinearity::custom_table(
            cfg.p, exps[0], ratio_table(n.at("table").at("positive"), tk + ".positive"),
            ratio_table(n.at("table").at("negative"), tk + ".negative"), coeffs[0]);
      } catch (const std::invalid_argument& e) {
        fail(tk, e.what());
      }
      break;
    }
  }
  if (n.contains("a")) {
    try {
      cfg.nonlinearity.set_growth_constant(get_number(n, nk, "a"));
    } catch (const std::invalid_argument& e) {
      fail(nk + ".a", e.what());
    }
  }
}

void parse_solver(const json& v, SolverConfig& s) {
  const std::string key = "solver";
  only_keys(v, key, {"tol_residual", "tol_energy", "max_iters", "armijo", "seeds", "renormalize_every",
                     "translation_normalize", "norm_ceiling", "stall_window", "fiber"});
  s.tol_residual = get_number_or(v, key, "tol_residual", s.tol_residual);
  s.tol_energy = get_number_or(v, key, "tol_energy", s.tol_energy);
  s.max_iters = static_cast<int>(get_int_or(v, key, "max_iters", s.max_iters));
  s.renormalize_every = static_cast<int>(get_int_or(v, key, "renormalize_every", s.renormalize_every));
  s.norm_ceiling = get_number_or(v, key, "norm_ceiling", s.norm_ceiling);
  s.stall_window = static_cast<int>(get_int_or(v, key, "stall_window", s.stall_window));
  if (v.contains("translation_normalize")) {
    if (!v.at("translation_normalize").is_boolean()) fail(key + ".translation_normalize", "expected a boolean");
    s.translation_normalize = v.at("translation_normalize").get<bool>();
  }
  if (v.contains("armijo")) {
    const json& a = v.at("armijo");
    only_keys(a, key + ".armijo", {"c1", "backtrack", "max_backtracks"});
    s.armijo.c1 = get_number_or(a, key + ".armijo", "c1", s.armijo.c1);
    s.armijo.backtrack = get_number_or(a, key + ".armijo", "backtrack", s.armijo.backtrack);
    s.armijo.max_backtracks = static_cast<int>(get_int_or(a, key + ".armijo", "max_backtracks", s.armijo.max_backtracks));
  }
  if (v.contains("fiber")) {
    const json& f = v.at("fiber");
    only_keys(f, key + ".fiber", {"theta_rtol", "s_rtol"});
    s.fiber.theta_rtol = get_number_or(f, key + ".fiber", "theta_rtol", s.fiber.theta_rtol);
    s.fiber.s_rtol = get_number_or(f, key + ".fiber", "s_rtol", s.fiber.s_rtol);
  }
  if (v.contains("seeds")) {
    const json& seeds = v.at("seeds");
    if (!seeds.is_array()) fail(key + ".seeds", "expected an array");
    for (std::size_t i = 0; i < seeds.size(); ++i)
      s.seeds.push_back(parse_seed(seeds[i], key + ".seeds[" + std::to_string(i) + "]"));
    if (s.seeds.empty()) fail(key + ".seeds", "must not be empty");
  } else {
    s.seeds = default_seeds();
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

ProblemInstance RunConfig::make_instance() const {
  return ProblemInstance(build_box(dim, sides, bc), potential, nonlinearity, p);
}

RunConfig parse_config(const json& doc) {
  only_keys(doc, "config", {"instance", "solver", "outputs", "check", "oracle"});
  RunConfig cfg;
  if (!doc.contains("instance")) fail("instance", "missing");
  parse_instance(doc.at("instance"), cfg);
  if (doc.contains("solver")) {
    parse_solver(doc.at("solver"), cfg.solver);
  } else {
    cfg.solver.seeds = default_seeds();
  }
  for (const Seed& s : cfg.solver.seeds)
    if (s.kind == Seed::Kind::Delta && !s.vertex.empty() && static_cast<int>(s.vertex.size()) != cfg.dim)
      fail("solver.seeds", "delta vertex must have dim coordinates");

  if (doc.contains("outputs")) {
    const json& o = doc.at("outputs");
    only_keys(o, "outputs", {"report", "field", "trace"});
    if (o.contains("report")) cfg.outputs.report = get_string(o, "outputs", "report");
    if (o.contains("field")) cfg.outputs.field = get_string(o, "outputs", "field");
    if (o.contains("trace")) cfg.outputs.trace = get_string(o, "outputs", "trace");
  }
  if (doc.contains("check")) {
    const json& c = doc.at("check");
    only_keys(c, "check", {"samples", "seed", "fd_directions", "fd_h", "assumption_tol"});
    cfg.check.samples = static_cast<int>(get_int_or(c, "check", "samples", cfg.check.samples));
    cfg.check.seed = static_cast<std::uint64_t>(get_int_or(c, "check", "seed", static_cast<long long>(cfg.check.seed)));
    cfg.check.fd_directions = static_cast<int>(get_int_or(c, "check", "fd_directions", cfg.check.fd_directions));
    cfg.check.fd_h = get_number_or(c, "check", "fd_h", cfg.check.fd_h);
    cfg.check.assumption_tol = get_number_or(c, "check", "assumption_tol", cfg.check.assumption_tol);
    if (cfg.check.samples < 1) fail("check.samples", "must be >= 1");
    if (!(cfg.check.fd_h > 0.0)) fail("check.fd_h", "must be positive");
  }
  if (doc.contains("oracle")) {
    const json& o = doc.at("oracle");
    only_keys(o, "oracle", {"grid", "polish_iters"});
    if (o.contains("grid")) {
      const auto g = number_list(o.at("grid"), "oracle.grid");
      if (g.size() != 3) fail("oracle.grid", "expected [lo, hi, step]");
      cfg.oracle.grid = {g[0], g[1], g[2]};
      if (!(g[1] > g[0]) || !(g[2] > 0.0)) fail("oracle.grid", "need lo < hi and step > 0");
    }
    cfg.oracle.polish_iters = static_cast<int>(get_int_or(o, "oracle", "polish_iters", cfg.oracle.polish_iters));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ":" + std::to_string(line_of_byte(text, e.byte)) + ": " + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const RunConfig& cfg) {
  const Nonlinearity& nl = cfg.nonlinearity;
  json exps = json::array(), coeffs = json::array();
  for (const auto& t : nl.terms()) {
    exps.push_back(t.exponent);
    coeffs.push_back(periodic_json(t.coefficient));
  }
  json nonlin{{"kind", to_string(nl.kind())}, {"exponents", exps}, {"coefficients", coeffs},
              {"a", nl.growth_constant()}};
  if (nl.kind() == NonlinearityKind::CustomTable)
    nonlin["table"] = {{"positive", ratio_table_json(nl.positive_table())},
                       {"negative", ratio_table_json(nl.negative_table())}};

  json seeds = json::array();
  for (const Seed& s : cfg.solver.seeds) seeds.push_back(seed_json(s));
  const SolverConfig& sc = cfg.solver;
  json out{
      {"instance",
       {{"dim", cfg.dim},
        {"sides", cfg.sides},
        {"bc", to_string(cfg.bc)},
        {"p", cfg.p},
        {"period", cfg.period},
        {"potential", periodic_json(cfg.potential)},
        {"nonlinearity", nonlin}}},
      {"solver",
       {{"tol_residual", sc.tol_residual},
        {"tol_energy", sc.tol_energy},
        {"max_iters", sc.max_iters},
        {"armijo", {{"c1", sc.armijo.c1}, {"backtrack", sc.armijo.backtrack}, {"max_backtracks", sc.armijo.max_backtracks}}},
        {"seeds", seeds},
        {"renormalize_every", sc.renormalize_every},
        {"translation_normalize", sc.translation_normalize},
        {"norm_ceiling", sc.norm_ceiling},
        {"stall_window", sc.stall_window},
        {"fiber", {{"theta_rtol", sc.fiber.theta_rtol}, {"s_rtol", sc.fiber.s_rtol}}}}},
      {"check",
       {{"samples", cfg.check.samples},
        {"seed", cfg.check.seed},
        {"fd_directions", cfg.check.fd_directions},
        {"fd_h", cfg.check.fd_h},
        {"assumption_tol", cfg.check.assumption_tol}}},
      {"oracle",
       {{"grid", {cfg.oracle.grid.lo, cfg.oracle.grid.hi, cfg.oracle.grid.step}},
        {"polish_iters", cfg.oracle.polish_iters}}}};
  json outputs = json::object();
  if (!cfg.outputs.report.empty()) outputs["report"] = cfg.outputs.report;
  if (!cfg.outputs.field.empty()) outputs["field"] = cfg.outputs.field;
  if (!cfg.outputs.trace.empty()) outputs["trace"] = cfg.outputs.trace;
  out["outputs"] = outputs;
  return out;
}

json to_json(const OracleReport& r) {
  json out{{"name", r.name},
           {"pass", r.pass},
           {"max_violation", r.max_violation},
           {"tolerance", r.tolerance},
           {"note", r.note}};
  out["witness"] = r.witness ? json(*r.witness) : json(nullptr);
  return out;
}

json report_json(const RunConfig& cfg, const MultistartResult& result, double wall_seconds) {
  const SolveReport& best = result.best;
  json runs = json::array();
  for (const SolveReport& r : result.runs)
    runs.push_back({{"seed_id", r.seed_id},
                    {"status", to_string(r.status)},
                    {"energy", r.energy},
                    {"residual", r.residual},
                    {"iterations", r.iterations},
                    {"message", r.message}});
  return json{{"energy", best.energy},
              {"residual", best.residual},
              {"nehari_defect", best.nehari_defect},
              {"iterations", best.iterations},
              {"status", to_string(best.status)},
              {"seed_id", best.seed_id},
              {"s_w_final", best.fiber_history.empty() ? 0.0 : best.fiber_history.back()},
              {"max_norm", best.max_norm},
              {"norm_ceiling_exceeded", best.norm_ceiling_exceeded},
              {"runs", runs},
              {"config_echo", to_json(cfg)},
              {"version", kVersion},
              {"wall_time_seconds", wall_seconds}};
}

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string field_csv(const LatticeBox& box, const Field& u) {
  std::string out;
  for (int i = 0; i < box.dim(); ++i) out += "x" + std::to_string(i + 1) + ",";
  out += "u\n";
  for (Index v = 0; v < box.vertex_count(); ++v) {
    for (Index c : box.coords_of(v)) out += std::to_string(c) + ",";
    out += g17(u[v]) + "\n";
  }
  return out;
}

std::string trace_csv(const SolveReport& rep) {
  std::string out = "iter,psi,residual,step\n";
  for (const TraceRow& t : rep.trace)
    out += std::to_string(t.iter) + "," + g17(t.psi) + "," + g17(t.residual) + "," + g17(t.step) + "\n";
  return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << contents;
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace nehari
