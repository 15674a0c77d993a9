#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "potential.hpp"
#include "spectrum.hpp"
#include "traceform.hpp"

namespace stargraph {

using ordered_json = nlohmann::ordered_json;

inline constexpr int config_schema_version = 1;

struct EdgeConfig {
  Family family = Family::exponential;
  double c = 0.0;
  double a = 1.0;
  double s = 0.0;
  double p = 0.0;
};

/// Everything a CLI run needs. Defaults are filled in on parse, and the
/// resolved form is echoed into every report.
struct RunConfig {
  std::vector<EdgeConfig> edges;

  double tol = 1e-10;
  std::optional<double> x_max;
  double low_energy_floor = 1e-3;

  double scan_k_min = 0.01;
  double scan_k_max = 100.0;
  std::size_t scan_npoints = 2000;
  bool scan_mirrored = false;

  std::optional<double> kappa_max;
  double oracle_h = 0.01;

  int order = 8;

  std::vector<double> trace_orders{0.5, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> fg_s{0.1, 0.25, 0.4};
  std::vector<int> decay_orders{1, 2, 3};
  double trace_tol = 1e-12;
  double trace_k_high = 60.0;
  int trace_panels_per_decade = 6;
  double trace_gate = 1e-3;
  double decay_tol = 0.2;
  double levinson_tol = 0.05;

  std::string output_dir = "out";

  StarPotential star() const {
    std::vector<EdgePotential> e;
    for (const auto& ec : edges) e.emplace_back(ec.family, ec.c, ec.a, ec.s, ec.p);
    return StarPotential(std::move(e), x_max);
  }

  JostOptions jost() const {
    JostOptions j;
    j.tol = tol;
    j.low_energy_floor = low_energy_floor;
    return j;
  }

  TraceOptions trace_options(unsigned threads) const {
    TraceOptions t;
    t.jost.tol = trace_tol;
    t.jost.low_energy_floor = low_energy_floor;
    t.k_low = low_energy_floor;
    t.k_high = trace_k_high;
    t.panels_per_decade = trace_panels_per_decade;
    t.gate = trace_gate;
    t.threads = threads;
    return t;
  }
};

namespace detail {

template <typename T>
T get_or(const ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

inline std::optional<double> get_optional(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline ordered_json section(const ordered_json& j, const char* key) {
  if (!j.contains(key)) return ordered_json::object();
  if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

} // namespace detail

inline void validate(const RunConfig& c) {
  using detail::require;
  require(c.edges.size() >= 2, "potential.edges needs at least two entries");
  require(c.tol > 0.0, "solver.tol must be positive");
  require(!c.x_max || *c.x_max > 0.0, "solver.x_max must be positive");
  require(c.low_energy_floor > 0.0, "solver.low_energy_floor must be positive");
  require(c.scan_k_min >= c.low_energy_floor, "scan.k_min must be at least the low-energy floor");
  require(c.scan_k_max > c.scan_k_min, "scan.k_max must exceed scan.k_min");
  require(c.scan_npoints >= 2, "scan.npoints must be at least 2");
  require(!c.kappa_max || *c.kappa_max > 0.0, "spectrum.kappa_max must be positive");
  require(c.oracle_h >= 0.0, "spectrum.oracle_h must be non-negative");
  require(c.order >= 1 && c.order <= max_asymptotic_order, "asymptotics.order must be in 1..8");
  for (double s : c.trace_orders) {
    const double t = 2.0 * s;
    require(s > 0.0 && std::abs(t - std::round(t)) < 1e-12, "trace orders must be multiples of 1/2");
    // Tails need L up to 2s + 1.
    require(static_cast<int>(std::round(t)) + 1 <= c.order, "trace order too high for asymptotics.order");
  }
  for (double s : c.fg_s) require(s > 0.0 && s < 0.5, "trace.fg_s values must lie in (0, 1/2)");
  require(c.fg_s.empty() || c.order >= 4, "F/G tails need asymptotics.order >= 4");
  for (int M : c.decay_orders)
    require(M >= 1 && M < c.order, "trace.decay_orders must lie in 1..order-1");
  require(c.trace_tol > 0.0 && c.trace_gate > 0.0 && c.decay_tol > 0.0 && c.levinson_tol > 0.0,
          "trace tolerances must be positive");
  require(c.trace_k_high > c.low_energy_floor, "trace.k_high must exceed the low-energy floor");
  require(c.trace_panels_per_decade >= 1, "trace.panels_per_decade must be positive");
}

inline RunConfig parse_config(const ordered_json& j) {
  using detail::get_or;
  try {
    const int version = get_or<int>(j, "schema_version", -1);
    if (version != config_schema_version)
      throw ConfigError("unsupported schema_version " + std::to_string(version));
    RunConfig c;
    const auto pot = detail::section(j, "potential");
    if (!pot.contains("edges") || !pot.at("edges").is_array())
      throw ConfigError("potential.edges must be an array");
    for (const auto& e : pot.at("edges")) {
      EdgeConfig ec;
      ec.family = parse_family(e.at("family").get<std::string>());
      ec.c = get_or<double>(e, "c", 0.0);
      ec.a = get_or<double>(e, "a", 1.0);
      ec.s = get_or<double>(e, "s", 0.0);
      ec.p = get_or<double>(e, "p", ec.family == Family::powerlaw ? 2.0 : 0.0);
      c.edges.push_back(ec);
    }
    const auto sol = detail::section(j, "solver");
    c.tol = get_or(sol, "tol", c.tol);
    c.x_max = detail::get_optional(sol, "x_max");
    c.low_energy_floor = get_or(sol, "low_energy_floor", c.low_energy_floor);
    const auto sc = detail::section(j, "scan");
    c.scan_k_min = get_or(sc, "k_min", c.scan_k_min);
    c.scan_k_max = get_or(sc, "k_max", c.scan_k_max);
    c.scan_npoints = get_or(sc, "npoints", c.scan_npoints);
    c.scan_mirrored = get_or(sc, "mirrored", c.scan_mirrored);
    const auto sp = detail::section(j, "spectrum");
    c.kappa_max = detail::get_optional(sp, "kappa_max");
    c.oracle_h = get_or(sp, "oracle_h", c.oracle_h);
    const auto as = detail::section(j, "asymptotics");
    c.order = get_or(as, "order", c.order);
    const auto tr = detail::section(j, "trace");
    c.trace_orders = get_or(tr, "orders", c.trace_orders);
    c.fg_s = get_or(tr, "fg_s", c.fg_s);
    c.decay_orders = get_or(tr, "decay_orders", c.decay_orders);
    c.trace_tol = get_or(tr, "tol", c.trace_tol);
    c.trace_k_high = get_or(tr, "k_high", c.trace_k_high);
    c.trace_panels_per_decade = get_or(tr, "panels_per_decade", c.trace_panels_per_decade);
    c.trace_gate = get_or(tr, "gate", c.trace_gate);
    c.decay_tol = get_or(tr, "decay_tol", c.decay_tol);
    c.levinson_tol = get_or(tr, "levinson_tol", c.levinson_tol);
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    validate(c);
    const auto hyp = check_hypotheses(c.star(), false);  // also runs the family checks
    for (std::size_t i = 0; i < hyp.edges.size(); ++i) {
      const auto& h = hyp.edges[i];
      if (!h.first_moment || !h.smooth_decay)
        throw ConfigError("edge " + std::to_string(i) + " violates the decay hypotheses: " + h.detail);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return parse_config(j);
}

inline ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["schema_version"] = config_schema_version;
  ordered_json edges = ordered_json::array();
  for (const auto& e : c.edges) {
    ordered_json o;
    o["family"] = std::string(family_name(e.family));
    o["c"] = e.c;
    o["a"] = e.a;
    o["s"] = e.s;
    o["p"] = e.p;
    edges.push_back(o);
  }
  j["potential"]["edges"] = edges;
  j["solver"]["tol"] = c.tol;
  j["solver"]["x_max"] = c.x_max ? ordered_json(*c.x_max) : ordered_json(nullptr);
  j["solver"]["low_energy_floor"] = c.low_energy_floor;
  j["scan"]["k_min"] = c.scan_k_min;
  j["scan"]["k_max"] = c.scan_k_max;
  j["scan"]["npoints"] = c.scan_npoints;
  j["scan"]["mirrored"] = c.scan_mirrored;
  j["spectrum"]["kappa_max"] = c.kappa_max ? ordered_json(*c.kappa_max) : ordered_json(nullptr);
  j["spectrum"]["oracle_h"] = c.oracle_h;
  j["asymptotics"]["order"] = c.order;
  j["trace"]["orders"] = c.trace_orders;
  j["trace"]["fg_s"] = c.fg_s;
  j["trace"]["decay_orders"] = c.decay_orders;
  j["trace"]["tol"] = c.trace_tol;
  j["trace"]["k_high"] = c.trace_k_high;
  j["trace"]["panels_per_decade"] = c.trace_panels_per_decade;
  j["trace"]["gate"] = c.trace_gate;
  j["trace"]["decay_tol"] = c.decay_tol;
  j["trace"]["levinson_tol"] = c.levinson_tol;
  j["output_dir"] = c.output_dir;
  return j;
}

// Non-finite values become null so the output stays valid JSON.
inline ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

inline ordered_json to_json(const std::vector<Eigenvalue>& ev) {
  ordered_json a = ordered_json::array();
  for (const auto& e : ev) a.push_back({{"lambda", number(e.lambda)}, {"multiplicity", e.multiplicity}});
  return a;
}

inline ordered_json to_json(const SpectrumResult& s) {
  ordered_json j;
  j["eigenvalues"] = to_json(s.eigenvalues);
  j["resonance_multiplicity"] = s.resonance_multiplicity;
  j["contour_winding"] = s.contour_winding;
  return j;
}

inline ordered_json to_json(const TraceReport& r) {
  ordered_json j;
  j["order"] = r.order;
  j["lhs_spectral"] = number(r.lhs_spectral);
  j["lhs_integral"] = number(r.lhs_integral);
  j["rhs"] = number(r.rhs);
  j["residual"] = number(r.residual);
  j["budget"] = number(r.budget);
  j["pass"] = r.pass;
  j["error"] = {{"quadrature", number(r.quadrature_error)},
                {"tail", number(r.tail_bound)},
                {"low_energy", number(r.low_energy_error)},
                {"integrator", number(r.integrator_error)},
                {"coefficients", number(r.coefficient_error)},
                {"total", number(r.error_estimate())}};
  return j;
}

inline ordered_json to_json(const FGReport& r) {
  ordered_json j;
  j["s"] = r.s;
  j["F"] = number(r.F);
  j["G"] = number(r.G);
  j["lhs"] = number(r.lhs);
  j["rhs"] = number(r.rhs);
  j["residual"] = number(r.residual);
  j["budget"] = number(r.budget);
  j["pass"] = r.pass;
  j["error_estimate"] = number(r.error_estimate);
  j["slow_convergence"] = r.slow_convergence;
  return j;
}

inline ordered_json to_json(const LevinsonReport& r, double tol) {
  ordered_json j;
  j["bound_states"] = r.bound_states;
  j["resonance_multiplicity"] = r.resonance;
  j["eta_zero"] = number(r.eta_zero);
  j["eta_zero_linear"] = number(r.eta_zero_linear);
  j["jump"] = number(r.jump);
  j["expected"] = number(r.expected);
  j["residual"] = number(r.residual);
  j["tolerance"] = tol;
  j["inconclusive"] = r.inconclusive;
  j["pass"] = r.pass;
  return j;
}

inline ordered_json to_json(const DecayReport& r, double tol) {
  ordered_json j;
  j["order"] = r.order;
  j["exact_zero"] = r.exact_zero;
  j["expected_slope"] = r.expected_slope;
  j["tolerance"] = tol;
  ordered_json rays = ordered_json::array();
  for (const auto& f : r.rays)
    rays.push_back({{"angle", f.angle},
                    {"slope", number(f.slope)},
                    {"samples", f.samples},
                    {"inconclusive", f.inconclusive}});
  j["rays"] = rays;
  j["pass"] = r.pass(tol);
  return j;
}

inline ordered_json to_json(const CoefficientTable& t, const std::array<double, 5>& closed) {
  ordered_json j;
  j["order"] = t.order;
  ordered_json rec = ordered_json::array(), err = ordered_json::array(), C = ordered_json::array();
  for (int m = 1; m <= t.order; ++m) {
    rec.push_back(number(t[m]));
    err.push_back(number(t.error[static_cast<std::size_t>(m)]));
    C.push_back(number(t.C[static_cast<std::size_t>(m)]));
  }
  ordered_json cf = ordered_json::array(), delta = ordered_json::array();
  for (int m = 1; m <= std::min(t.order, 5); ++m) {
    cf.push_back(number(closed[static_cast<std::size_t>(m - 1)]));
    delta.push_back(number(t[m] - closed[static_cast<std::size_t>(m - 1)]));
  }
  j["recursive"] = rec;
  j["recursive_error"] = err;
  j["vertex_constants"] = C;
  j["closed_form"] = cf;
  j["delta"] = delta;
  return j;
}

} // namespace stargraph
