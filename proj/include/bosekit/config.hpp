#pragma once

// Strict JSON run configuration: unknown keys are rejected with line-anchored
// messages, numeric ranges are validated at load, and the parsed object can
// rebuild grids, bases, and Hamiltonian specs for the check suites.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bosekit/dynamics.hpp"

namespace bosekit {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PotentialConfig {
  std::string kind = "zero";  // zero | gaussian | squarewell | table
  double amplitude = 0.0;     // gaussian a·e^{−α r²}
  double alpha = 1.0;
  double depth = 0.0;  // squarewell: depth on |r| ≤ range
  double range = 1.0;
  std::vector<double> values;  // table: V(k·h) by cell offset k, zero beyond
};

struct RunConfig {
  std::uint64_t seed = 42;
  int grid_d = 8;
  double grid_h = 0.7;
  bool grid_periodic = true;
  int nmax = 2;
  std::size_t memory_budget = kDefaultBudget;
  PotentialConfig potential;
  std::optional<double> trap_L;
  std::vector<double> times{0.4};
  int dyson_order = 4;
  double quad_tolerance = kDysonQuadTol;
  std::vector<double> betas{0.25, 1.0, 4.0};
  double mu = -0.6;
  std::vector<std::string> checks;  // empty = every registered suite
  std::string output_directory = "out";
  std::vector<std::string> formats{"json", "csv"};

  Grid grid() const { return Grid{grid_d, grid_h, grid_periodic}; }

  std::function<double(double)> potential_fn() const {
    if (potential.kind == "zero") return nullptr;
    if (potential.kind == "gaussian") {
      const double a = potential.amplitude, al = potential.alpha;
      return [a, al](double r) { return a * std::exp(-al * r * r); };
    }
    if (potential.kind == "squarewell") {
      const double depth = potential.depth, range = potential.range;
      return [depth, range](double r) { return std::abs(r) <= range ? depth : 0.0; };
    }
    const std::vector<double> v = potential.values;
    const double h = grid_h;
    return [v, h](double r) {
      const auto k = static_cast<std::size_t>(std::lround(std::abs(r) / h));
      return k < v.size() ? v[k] : 0.0;
    };
  }

  HamiltonianSpec spec() const { return HamiltonianSpec{grid(), potential_fn(), trap_L, 0.0}; }

  HamiltonianSpec untrapped_spec() const {
    return HamiltonianSpec{grid(), potential_fn(), std::nullopt, 0.0};
  }

  FockBasis basis() const { return enumerate_basis(grid_d, nmax, memory_budget); }
};

namespace detail {

// best-effort line anchor: first occurrence of the quoted key in the source text
inline int key_line(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

[[noreturn]] inline void config_fail(const std::string& text, const std::string& key,
                                     const std::string& what) {
  const int line = key_line(text, key);
  throw ConfigError("config line " + std::to_string(line) + ": '" + key + "' " + what);
}

inline void reject_unknown(const std::string& text, const nlohmann::json& obj,
                           const std::string& scope, const std::vector<std::string>& known) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || item.key() == k;
    if (!ok)
      config_fail(text, item.key(),
                  "is not a recognized key" + (scope.empty() ? "" : " in [" + scope + "]"));
  }
}

template <typename T>
T pull(const std::string& text, const nlohmann::json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_fail(text, key, "has the wrong type");
  }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError("config line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config line 1: top level must be an object");
  using detail::config_fail;
  using detail::pull;
  detail::reject_unknown(text, j, "",
                         {"seed", "grid", "fock", "potential", "trap", "dynamics", "thermo",
                          "checks", "output"});

  RunConfig cfg;
  cfg.seed = pull<std::uint64_t>(text, j, "seed", cfg.seed);

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::reject_unknown(text, g, "grid", {"d", "h", "periodic"});
    cfg.grid_d = pull<int>(text, g, "d", cfg.grid_d);
    cfg.grid_h = pull<double>(text, g, "h", cfg.grid_h);
    cfg.grid_periodic = pull<bool>(text, g, "periodic", cfg.grid_periodic);
    if (cfg.grid_d < 1) config_fail(text, "d", "must be at least 1");
    if (!(cfg.grid_h > 0.0)) config_fail(text, "h", "must be positive");
  }
  if (j.contains("fock")) {
    const auto& f = j.at("fock");
    detail::reject_unknown(text, f, "fock", {"nmax", "memory_budget"});
    cfg.nmax = pull<int>(text, f, "nmax", cfg.nmax);
    const auto budget = pull<std::int64_t>(text, f, "memory_budget",
                                           static_cast<std::int64_t>(cfg.memory_budget));
    if (cfg.nmax < 0) config_fail(text, "nmax", "must be nonnegative");
    if (budget <= 0) config_fail(text, "memory_budget", "must be positive");
    cfg.memory_budget = static_cast<std::size_t>(budget);
  }
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    detail::reject_unknown(text, p, "potential",
                           {"kind", "amplitude", "alpha", "depth", "range", "values"});
    cfg.potential.kind = pull<std::string>(text, p, "kind", cfg.potential.kind);
    cfg.potential.amplitude = pull<double>(text, p, "amplitude", cfg.potential.amplitude);
    cfg.potential.alpha = pull<double>(text, p, "alpha", cfg.potential.alpha);
    cfg.potential.depth = pull<double>(text, p, "depth", cfg.potential.depth);
    cfg.potential.range = pull<double>(text, p, "range", cfg.potential.range);
    cfg.potential.values = pull<std::vector<double>>(text, p, "values", cfg.potential.values);
    const std::string& k = cfg.potential.kind;
    if (k != "zero" && k != "gaussian" && k != "squarewell" && k != "table")
      config_fail(text, "kind", "must be zero, gaussian, squarewell, or table");
    if (k == "gaussian" && !(cfg.potential.alpha > 0.0))
      config_fail(text, "alpha", "must be positive");
    if (k == "squarewell" && !(cfg.potential.range > 0.0))
      config_fail(text, "range", "must be positive");
    if (k == "table" && cfg.potential.values.empty())
      config_fail(text, "values", "must be a nonempty array");
  }
  if (j.contains("trap")) {
    const auto& t = j.at("trap");
    detail::reject_unknown(text, t, "trap", {"L", "infinite"});
    const bool infinite = pull<bool>(text, t, "infinite", false);
    if (t.contains("L") && infinite)
      config_fail(text, "infinite", "conflicts with a finite trap length");
    if (t.contains("L")) {
      const double L = pull<double>(text, t, "L", 0.0);
      if (!(L > 0.0)) config_fail(text, "L", "must be positive");
      cfg.trap_L = L;
    } else if (!infinite) {
      config_fail(text, "trap", "needs either L or infinite=true");
    }
  } else {
    cfg.trap_L = 8.0;
  }
  if (j.contains("dynamics")) {
    const auto& d = j.at("dynamics");
    detail::reject_unknown(text, d, "dynamics", {"times", "order", "quad_tolerance"});
    cfg.times = pull<std::vector<double>>(text, d, "times", cfg.times);
    cfg.dyson_order = pull<int>(text, d, "order", cfg.dyson_order);
    cfg.quad_tolerance = pull<double>(text, d, "quad_tolerance", cfg.quad_tolerance);
    if (cfg.times.empty()) config_fail(text, "times", "must be a nonempty array");
    if (cfg.dyson_order < 0) config_fail(text, "order", "must be nonnegative");
    if (!(cfg.quad_tolerance > 0.0)) config_fail(text, "quad_tolerance", "must be positive");
  }
  if (j.contains("thermo")) {
    const auto& t = j.at("thermo");
    detail::reject_unknown(text, t, "thermo", {"betas", "mu"});
    cfg.betas = pull<std::vector<double>>(text, t, "betas", cfg.betas);
    cfg.mu = pull<double>(text, t, "mu", cfg.mu);
    if (cfg.betas.empty()) config_fail(text, "betas", "must be a nonempty array");
    for (double b : cfg.betas)
      if (!(b > 0.0)) config_fail(text, "betas", "must be positive throughout");
  }
  cfg.checks = pull<std::vector<std::string>>(text, j, "checks", cfg.checks);
  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown(text, o, "output", {"directory", "formats"});
    cfg.output_directory = pull<std::string>(text, o, "directory", cfg.output_directory);
    cfg.formats = pull<std::vector<std::string>>(text, o, "formats", cfg.formats);
    if (cfg.output_directory.empty()) config_fail(text, "directory", "must be nonempty");
    for (const auto& f : cfg.formats)
      if (f != "json" && f != "csv") config_fail(text, "formats", "allows only json and csv");
  }
  return cfg;
}

// canonical echo of the effective configuration, used in reports
inline nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["grid"] = {{"d", cfg.grid_d}, {"h", cfg.grid_h}, {"periodic", cfg.grid_periodic}};
  j["fock"] = {{"nmax", cfg.nmax}, {"memory_budget", cfg.memory_budget}};
  nlohmann::ordered_json p;
  p["kind"] = cfg.potential.kind;
  if (cfg.potential.kind == "gaussian") {
    p["amplitude"] = cfg.potential.amplitude;
    p["alpha"] = cfg.potential.alpha;
  } else if (cfg.potential.kind == "squarewell") {
    p["depth"] = cfg.potential.depth;
    p["range"] = cfg.potential.range;
  } else if (cfg.potential.kind == "table") {
    p["values"] = cfg.potential.values;
  }
  j["potential"] = p;
  if (cfg.trap_L)
    j["trap"] = {{"L", *cfg.trap_L}};
  else
    j["trap"] = {{"infinite", true}};
  j["dynamics"] = {{"times", cfg.times},
                   {"order", cfg.dyson_order},
                   {"quad_tolerance", cfg.quad_tolerance}};
  j["thermo"] = {{"betas", cfg.betas}, {"mu", cfg.mu}};
  j["checks"] = cfg.checks;
  j["output"] = {{"directory", cfg.output_directory}, {"formats", cfg.formats}};
  return j;
}

// numeric sweep axes: dotted path -> setter
inline void set_config_axis(RunConfig& cfg, const std::string& axis, double value) {
  auto as_int = [&](const char* what) {
    const auto v = static_cast<std::int64_t>(std::llround(value));
    if (static_cast<double>(v) != value)
      throw ConfigError("axis '" + axis + "' " + what + " needs an integer, got " +
                        std::to_string(value));
    return v;
  };
  if (axis == "grid.d") {
    const auto v = as_int("grid size");
    if (v < 1) throw ConfigError("axis 'grid.d' must stay >= 1");
    cfg.grid_d = static_cast<int>(v);
  } else if (axis == "grid.h") {
    if (!(value > 0.0)) throw ConfigError("axis 'grid.h' must stay positive");
    cfg.grid_h = value;
  } else if (axis == "fock.nmax") {
    const auto v = as_int("cutoff");
    if (v < 0) throw ConfigError("axis 'fock.nmax' must stay nonnegative");
    cfg.nmax = static_cast<int>(v);
  } else if (axis == "fock.memory_budget") {
    const auto v = as_int("budget");
    if (v <= 0) throw ConfigError("axis 'fock.memory_budget' must stay positive");
    cfg.memory_budget = static_cast<std::size_t>(v);
  } else if (axis == "trap.L") {
    if (!(value > 0.0)) throw ConfigError("axis 'trap.L' must stay positive");
    cfg.trap_L = value;
  } else if (axis == "potential.amplitude") {
    cfg.potential.amplitude = value;
  } else if (axis == "potential.alpha") {
    if (!(value > 0.0)) throw ConfigError("axis 'potential.alpha' must stay positive");
    cfg.potential.alpha = value;
  } else if (axis == "dynamics.order") {
    const auto v = as_int("order");
    if (v < 0) throw ConfigError("axis 'dynamics.order' must stay nonnegative");
    cfg.dyson_order = static_cast<int>(v);
  } else if (axis == "dynamics.quad_tolerance") {
    if (!(value > 0.0)) throw ConfigError("axis 'dynamics.quad_tolerance' must stay positive");
    cfg.quad_tolerance = value;
  } else if (axis == "thermo.mu") {
    cfg.mu = value;
  } else if (axis == "seed") {
    cfg.seed = static_cast<std::uint64_t>(as_int("seed"));
  } else {
    throw ConfigError("axis '" + axis + "' does not name a numeric configuration key");
  }
}

}  // namespace bosekit
