#pragma once

// Flat `section.key = value` configuration. '#' starts a comment; blank
// lines are ignored; every key may appear once.
//
//   warp.kind        euclidean | spherical | hyperbolic | custom
//   warp.coeffs      comma-separated polynomial coefficients (custom)
//   warp.domain      "r_lo,r_hi" (required for custom)
//   problem.k, problem.l, problem.r1, problem.r2
//   f.expr | f.builtin = round_exponential (f.rm, f.alpha)
//        | f.manufactured = target CSV | f.manufactured_expr = r*(th, ph)
//   f.decay          radial decay of a manufactured f (default 1)
//   phi.rm, phi.c
//   mesh.n_theta, mesh.n_phi, mesh.reduced, mesh.order
//   solver.newton_tol, solver.max_newton, solver.t_step_init, solver.t_step_min
//   monitor.alpha, monitor.A, monitor.gamma_arg = Lambda | r
//   geometry.target  radius r(th, ph) for verify-geometry
//   sweep.key, sweep.values (comma-separated)

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wcurv/continuation_solver.hpp"
#include "wcurv/errors.hpp"
#include "wcurv/estimate_monitor.hpp"
#include "wcurv/fexpr.hpp"
#include "wcurv/io.hpp"
#include "wcurv/problem_spec.hpp"

namespace wcurv {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    for (const auto& kv : out) {
      if (kv.first == key) throw ConfigError(key, "duplicate key");
    }
    out.emplace_back(key, value);
  }
  return out;
}

struct RunConfig {
  KeyValues entries;  // as read, for echoing
  ProblemSpec spec;
  MeshSpec mesh;
  SolverOptions solver;
  MonitorOptions monitor;
  std::optional<std::string> geometry_target;
  std::optional<std::string> sweep_key;
  std::vector<std::string> sweep_values;
};

namespace detail {

class KeyReader {
 public:
  explicit KeyReader(const KeyValues& kv) {
    for (const auto& [k, v] : kv) values_[k] = v;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> text(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.push_back(key);
    if (it->second.empty()) throw ConfigError(key, "empty value");
    return it->second;
  }

  std::optional<double> number(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t->c_str(), &end);
    if (end != t->c_str() + t->size() || !std::isfinite(v)) throw ConfigError(key, "not a number: '" + *t + "'");
    return v;
  }

  std::optional<int> integer(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    char* end = nullptr;
    const long v = std::strtol(t->c_str(), &end, 10);
    if (end != t->c_str() + t->size()) throw ConfigError(key, "not an integer: '" + *t + "'");
    return static_cast<int>(v);
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    if (*t == "true" || *t == "1" || *t == "yes") return true;
    if (*t == "false" || *t == "0" || *t == "no") return false;
    throw ConfigError(key, "not a boolean: '" + *t + "'");
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const auto t = text(key);
    if (!t) return out;
    std::stringstream ss(*t);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) throw ConfigError(key, "not a number list");
      out.push_back(v);
    }
    return out;
  }

  void reject_unused() const {
    for (const auto& [k, v] : values_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) throw ConfigError(k, "unknown key");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> used_;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

}  // namespace detail

// `base_dir` resolves relative paths (the manufactured target CSV).
inline RunConfig build_config(const KeyValues& kv, const std::string& base_dir = ".") {
  detail::KeyReader in(kv);
  RunConfig cfg;
  cfg.entries = kv;

  // Warp profile.
  const std::string kind = in.text("warp.kind").value_or("euclidean");
  const std::vector<double> domain = in.numbers("warp.domain");
  const std::vector<double> coeffs = in.numbers("warp.coeffs");
  if (!domain.empty() && domain.size() != 2) throw ConfigError("warp.domain", "expected r_lo,r_hi");
  auto domain_or = [&](Interval d) {
    if (!domain.empty()) d = {domain[0], domain[1]};
    if (!(d.lo < d.hi)) throw ConfigError("warp.domain", "need r_lo < r_hi");
    return d;
  };
  try {
    if (kind == "euclidean") cfg.spec.profile = WarpProfile::euclidean(domain_or({0.0, 10.0}));
    else if (kind == "spherical") cfg.spec.profile = WarpProfile::spherical(domain_or({0.0, std::numbers::pi / 2}));
    else if (kind == "hyperbolic") cfg.spec.profile = WarpProfile::hyperbolic(domain_or({0.0, 10.0}));
    else if (kind == "custom") {
      if (domain.empty()) throw ConfigError("warp.domain", "a custom profile needs warp.domain");
      if (coeffs.empty()) throw ConfigError("warp.coeffs", "a custom profile needs coefficients");
      cfg.spec.profile = WarpProfile::custom(coeffs, domain_or({0.0, 0.0}));
    } else {
      throw ConfigError("warp.kind", "unknown profile '" + kind + "'");
    }
    const ProfileValidation pv = validate_profile(cfg.spec.profile);
    if (!pv.passed) throw ConfigError(kind == "custom" ? "warp.coeffs" : "warp.domain", pv.message);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("warp.kind", e.what());
  }

  // Problem.
  cfg.spec.q.k = in.integer("problem.k").value_or(2);
  cfg.spec.q.l = in.integer("problem.l").value_or(0);
  const auto r1 = in.number("problem.r1");
  const auto r2 = in.number("problem.r2");
  if (!r1) throw ConfigError("problem.r1", "missing");
  if (!r2) throw ConfigError("problem.r2", "missing");
  cfg.spec.r1 = *r1;
  cfg.spec.r2 = *r2;
  cfg.spec.phi_rm = in.number("phi.rm");
  cfg.spec.phi_c = in.number("phi.c").value_or(1.0);
  cfg.spec.validate();

  // Mesh.
  cfg.mesh.reduced = in.boolean("mesh.reduced").value_or(false);
  cfg.mesh.n_theta = in.integer("mesh.n_theta").value_or(32);
  cfg.mesh.n_phi = cfg.mesh.reduced ? 1 : in.integer("mesh.n_phi").value_or(2 * cfg.mesh.n_theta);
  if (cfg.mesh.reduced && in.has("mesh.n_phi")) in.integer("mesh.n_phi");
  cfg.mesh.order = in.integer("mesh.order").value_or(0);
  if (cfg.mesh.n_theta < 16) throw ConfigError("mesh.n_theta", "must be at least 16");
  if (!cfg.mesh.reduced && (cfg.mesh.n_phi < 4 || cfg.mesh.n_phi % 2 != 0)) {
    throw ConfigError("mesh.n_phi", "must be even and at least 4");
  }
  if (cfg.mesh.order != 0 && cfg.mesh.order != 4 && cfg.mesh.order != 6) {
    throw ConfigError("mesh.order", "must be 4 or 6");
  }

  // Right-hand side.
  const int sources = in.has("f.expr") + in.has("f.builtin") + in.has("f.manufactured") + in.has("f.manufactured_expr");
  if (sources != 1) {
    throw ConfigError("f.expr", "exactly one of f.expr, f.builtin, f.manufactured, f.manufactured_expr is required");
  }
  const double decay = in.number("f.decay").value_or(1.0);
  if (decay < 0.0) throw ConfigError("f.decay", "must be non-negative");
  if (auto e = in.text("f.expr")) {
    try {
      cfg.spec.f = PrescribedF::expression(*e);
    } catch (const ParseError& pe) {
      throw ConfigError("f.expr", pe.what());
    }
  } else if (auto b = in.text("f.builtin")) {
    if (*b != "round_exponential") throw ConfigError("f.builtin", "unknown builtin '" + *b + "'");
    cfg.spec.f = PrescribedF::round_exponential(in.number("f.rm").value_or(cfg.spec.rm()),
                                                in.number("f.alpha").value_or(1.0));
  } else if (auto path = in.text("f.manufactured")) {
    std::filesystem::path p(*path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    try {
      cfg.spec.f = manufacture_f(read_field_csv(p.string(), cfg.mesh.order), cfg.spec, decay);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw ConfigError("f.manufactured", err.what());
    }
  } else if (auto target = in.text("f.manufactured_expr")) {
    try {
      cfg.spec.f = manufacture_f(FExpr::parse(*target), cfg.spec, *cfg.mesh.build(), decay);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw ConfigError("f.manufactured_expr", err.what());
    }
  }
  if (!in.has("f.builtin")) {
    for (const char* k : {"f.rm", "f.alpha"}) {
      if (in.has(k)) throw ConfigError(k, "only meaningful with f.builtin");
    }
  }
  if (in.has("f.decay") && !in.has("f.manufactured") && !in.has("f.manufactured_expr")) {
    throw ConfigError("f.decay", "only meaningful with a manufactured f");
  }

  // Solver.
  if (auto v = in.number("solver.newton_tol")) cfg.solver.newton_tol = *v;
  if (auto v = in.integer("solver.max_newton")) cfg.solver.max_newton = *v;
  if (auto v = in.number("solver.t_step_init")) cfg.solver.t_step_init = *v;
  if (auto v = in.number("solver.t_step_min")) cfg.solver.t_step_min = *v;
  cfg.solver.validate();

  // Monitor.
  if (auto v = in.number("monitor.alpha")) cfg.monitor.alpha = *v;
  if (auto v = in.number("monitor.A")) cfg.monitor.A = *v;
  if (auto g = in.text("monitor.gamma_arg")) {
    if (*g == "Lambda") cfg.monitor.gamma_argument = GammaArgument::capital_lambda;
    else if (*g == "r") cfg.monitor.gamma_argument = GammaArgument::radius;
    else throw ConfigError("monitor.gamma_arg", "must be Lambda or r");
  }

  cfg.geometry_target = in.text("geometry.target");
  if (cfg.geometry_target) {
    try {
      FExpr::parse(*cfg.geometry_target);
    } catch (const ParseError& pe) {
      throw ConfigError("geometry.target", pe.what());
    }
  }
  cfg.sweep_key = in.text("sweep.key");
  if (auto v = in.text("sweep.values")) cfg.sweep_values = detail::split_list(*v);
  if (cfg.sweep_key && cfg.sweep_values.empty()) throw ConfigError("sweep.values", "missing");

  in.reject_unused();
  return cfg;
}

inline KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

inline RunConfig load_config(const std::string& path) {
  const std::filesystem::path p(path);
  return build_config(read_key_values(path), p.has_parent_path() ? p.parent_path().string() : ".");
}

// Replaces (or appends) one key.
inline KeyValues with_override(KeyValues kv, const std::string& key, const std::string& value) {
  for (auto& entry : kv) {
    if (entry.first == key) {
      entry.second = value;
      return kv;
    }
  }
  kv.emplace_back(key, value);
  return kv;
}

}  // namespace wcurv
