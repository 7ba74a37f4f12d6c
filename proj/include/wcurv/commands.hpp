#pragma once

// Subcommands behind the wcurv executable. Each returns a process exit code
// and writes a JSON run report (plus CSVs) into the output directory.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcurv/config.hpp"
#include "wcurv/continuation_solver.hpp"
#include "wcurv/estimate_monitor.hpp"
#include "wcurv/identity_checks.hpp"
#include "wcurv/io.hpp"
#include "wcurv/problem_spec.hpp"
#include "wcurv/selftest.hpp"

namespace wcurv {

namespace exit_code {
inline constexpr int converged = 0;
inline constexpr int error = 1;
inline constexpr int config_error = 2;
inline constexpr int assumption_failure = 3;
inline constexpr int breakdown = 4;
}  // namespace exit_code

struct CommandOptions {
  std::string config_path;
  std::string out_dir = "wcurv_out";
  bool force = false;
  std::optional<double> alpha;
  std::optional<double> A;
  std::optional<std::string> sweep_key;
  std::optional<std::string> sweep_values;
};

using Json = nlohmann::ordered_json;

namespace cmd_detail {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline Json echo(const KeyValues& kv) {
  Json j = Json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

inline Json to_json(const SamplePoint& p) { return {{"r", p.r}, {"th", p.th}, {"ph", p.ph}, {"nur", p.nur}}; }

inline Json to_json(const AssumptionReport& rep) {
  Json arr = Json::array();
  for (const AssumptionResult& a : rep.results) {
    Json j = {{"name", a.name}, {"passed", a.passed}, {"boundary_case", a.boundary_case}};
    j["margin"] = std::isfinite(a.margin) ? Json(a.margin) : Json(nullptr);
    j["worst"] = to_json(a.worst);
    if (!a.message.empty()) j["message"] = a.message;
    arr.push_back(j);
  }
  return {{"passed", rep.passed()}, {"boundary_case", rep.boundary_case()}, {"checks", arr}};
}

inline Json to_json(const MonitorRecord& m) {
  return {{"t", m.t},
          {"r_min", m.r_min},
          {"r_max", m.r_max},
          {"tau_min", m.tau_min},
          {"v_max", m.v_max},
          {"grad_max", m.grad_max},
          {"kappa_max", m.kappa_max},
          {"mu_min", m.mu_min},
          {"a", m.a},
          {"phi_test_max", {{"value", m.phi_test_max.value}, {"node", m.phi_test_max.node}}},
          {"p_test_max", {{"value", m.p_test_max.value}, {"node", m.p_test_max.node}}},
          {"below_r1", m.below_r1},
          {"above_r2", m.above_r2}};
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void print_margins(std::ostream& os, const AssumptionReport& rep) {
  os << "assumption        status   margin        worst r\n";
  for (const AssumptionResult& a : rep.results) {
    os << std::left << std::setw(18) << a.name << std::setw(9) << (a.passed ? "pass" : "FAIL");
    if (a.name == "positivity") {
      os << "-             -";
    } else {
      os << std::setw(14) << short_number(a.margin) << short_number(a.worst.r);
    }
    if (a.boundary_case) os << "  (boundary case)";
    os << "\n";
  }
}

inline void write_report(const std::string& dir, const std::string& name, const Json& report) {
  std::filesystem::create_directories(dir);
  write_text((std::filesystem::path(dir) / name).string(), report.dump(2) + "\n");
}

inline RunConfig apply_flags(RunConfig cfg, const CommandOptions& opt) {
  if (opt.alpha) cfg.monitor.alpha = *opt.alpha;
  if (opt.A) cfg.monitor.A = *opt.A;
  return cfg;
}

}  // namespace cmd_detail

struct SolveOutcome {
  int code = exit_code::error;
  Json report;
  std::optional<ContinuationResult> result;
  int barrier_violations = 0;
};

// check_assumptions -> continuation_solve -> monitor, writing
// report.json, solution.csv, geometry.csv and monitor.csv into out_dir.
inline SolveOutcome run_solve(const RunConfig& cfg, const std::string& out_dir, bool force, std::ostream& log) {
  using namespace cmd_detail;
  Stopwatch clock;
  SolveOutcome out;
  Json& rep = out.report;
  rep["command"] = "solve";
  rep["config"] = echo(cfg.entries);
  rep["problem"] = {{"k", cfg.spec.q.k},      {"l", cfg.spec.q.l},   {"profile", to_string(cfg.spec.profile.kind())},
                    {"f", cfg.spec.f.describe()}, {"r1", cfg.spec.r1}, {"r2", cfg.spec.r2},
                    {"phi_rm", cfg.spec.rm()}, {"phi_c", cfg.spec.phi_c}, {"mesh", cfg.mesh.label()}};
  Json timings = Json::object();

  const AssumptionReport assumptions = check_assumptions(cfg.spec);
  timings["assumptions"] = clock.lap();
  rep["assumptions"] = to_json(assumptions);
  if (!assumptions.passed()) {
    print_margins(log, assumptions);
    if (!force) {
      rep["status"] = "assumption-fail";
      rep["timings"] = timings;
      write_report(out_dir, "report.json", rep);
      out.code = exit_code::assumption_failure;
      return out;
    }
    log << "continuing past failed assumptions (--force)\n";
  } else if (assumptions.boundary_case()) {
    log << "warning: assumptions hold only in the boundary case\n";
  }

  std::vector<MonitorRecord> records;
  Json history = Json::array();
  const bool check_barrier = assumptions.passed();
  auto observer = [&](const ContinuationState& s) {
    const MonitorRecord m = monitor(s, cfg.spec, cfg.monitor);
    if (check_barrier && !m.barrier_ok()) ++out.barrier_violations;
    records.push_back(m);
    history.push_back({{"t", s.t},
                       {"newton_iters", s.newton_iters},
                       {"residual_norm", s.residual_norm},
                       {"admissible", s.admissible},
                       {"monitor", to_json(m)}});
  };
  const MeshPtr mesh = cfg.mesh.build();
  ContinuationResult res = continuation_solve(cfg.spec, mesh, cfg.solver, observer);
  timings["continuation"] = clock.lap();
  rep["history"] = history;
  rep["total_newton"] = res.total_newton;
  rep["barrier_violations"] = out.barrier_violations;

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  const ContinuationState& fin = res.final_state;
  const GraphGeometry geo = compute_geometry(fin.r_field, cfg.spec.profile);
  write_text((dir / "solution.csv").string(), field_csv(fin.r_field));
  write_text((dir / "geometry.csv").string(), geometry_csv(geo));
  write_text((dir / "monitor.csv").string(), monitor_csv(records));
  rep["files"] = {{"solution", (dir / "solution.csv").string()},
                  {"geometry", (dir / "geometry.csv").string()},
                  {"monitor", (dir / "monitor.csv").string()},
                  {"report", (dir / "report.json").string()}};
  const double recheck = max_norm(residual(cfg.spec, fin.t, fin.r_field).values());
  rep["final"] = {{"t", fin.t}, {"residual_norm", fin.residual_norm}, {"residual_recheck", recheck}};
  timings["output"] = clock.lap();
  rep["timings"] = timings;

  if (res.converged) {
    rep["status"] = "converged";
    out.code = exit_code::converged;
    log << "converged: t = 1, residual " << fin.residual_norm << ", " << res.total_newton << " Newton iterations\n";
  } else {
    rep["status"] = "breakdown";
    rep["message"] = res.message;
    if (res.failed_interval) rep["failed_interval"] = {res.failed_interval->first, res.failed_interval->second};
    out.code = exit_code::breakdown;
    log << res.message << "\n";
  }
  write_report(out_dir, "report.json", rep);
  out.result = std::move(res);
  return out;
}

// Runs `body` and maps configuration and other errors to exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::error;
  }
}

inline int cmd_solve(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = cmd_detail::apply_flags(load_config(opt.config_path), opt);
    return run_solve(cfg, opt.out_dir, opt.force, log).code;
  });
}

inline int cmd_check_assumptions(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(opt.config_path);
    const AssumptionReport rep = check_assumptions(cfg.spec);
    cmd_detail::print_margins(log, rep);
    Json j = {{"command", "check-assumptions"}, {"config", cmd_detail::echo(cfg.entries)}};
    j["assumptions"] = cmd_detail::to_json(rep);
    j["status"] = rep.passed() ? "pass" : "assumption-fail";
    cmd_detail::write_report(opt.out_dir, "assumptions.json", j);
    return rep.passed() ? exit_code::converged : exit_code::assumption_failure;
  });
}

inline constexpr double kOracleTolerance = 1e-5;
inline constexpr double kIdentityTolerance = 1e-4;
inline constexpr double kIdentityRatio = 8.0;

// Extrinsic oracle on the configured mesh (flat profiles), then the support
// function and Codazzi identities on reduced meshes with 128 and 256 nodes.
inline int cmd_verify_geometry(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(opt.config_path);
    const std::string target_text = cfg.geometry_target.value_or("1 + 0.1*sin(th)*cos(ph)");
    const FExpr target = FExpr::parse(target_text);
    Json j = {{"command", "verify-geometry"}, {"config", cmd_detail::echo(cfg.entries)}, {"target", target_text}};
    bool ok = true;

    const MeshPtr mesh = cfg.mesh.build();
    const ScalarField r = ScalarField::from_function(mesh, [&](double t, double p) { return target(0.0, t, p, 1.0); });
    const GraphGeometry geo = compute_geometry(r, cfg.spec.profile);
    double sym = 0.0;
    for (const NodeGeometry& ng : geo.nodes) sym = std::max(sym, ng.symmetry_residual());
    j["symmetry_residual"] = sym;
    if (cfg.spec.profile.kind() == WarpKind::euclidean) {
      const double e = oracle_relative_error(geo, extrinsic_oracle_euclidean(r));
      const bool pass = e <= kOracleTolerance;
      ok = ok && pass;
      j["extrinsic_oracle"] = {{"mesh", cfg.mesh.label()}, {"relative_error", e}, {"tolerance", kOracleTolerance}, {"passed", pass}};
      log << "extrinsic oracle (" << cfg.mesh.label() << "): relative error " << e << (pass ? "  pass" : "  FAIL") << "\n";
    } else {
      j["extrinsic_oracle"] = {{"skipped", "flat ambient space only"}};
    }

    if (cfg.spec.profile.space_form_curvature()) {
      // Axisymmetric part of the target: its value on the meridian phi = 0.
      const bool axisym = !target.uses(FVar::ph);
      const std::string id_text = axisym ? target_text : "1 + 0.05*cos(th)";
      const FExpr id_target = FExpr::parse(id_text);
      const RefinementStudy st = identity_refinement(
          cfg.spec.profile, [&](double t) { return id_target(0.0, t, 0.0, 1.0); }, 128);
      const bool pass = st.fine.max() <= kIdentityTolerance && st.codazzi_fine <= kIdentityTolerance &&
                        st.ratio >= kIdentityRatio && st.codazzi_ratio >= kIdentityRatio;
      ok = ok && pass;
      j["identities"] = {{"target", id_text},
                         {"grad_lambda", st.fine.grad_lambda},
                         {"grad_tau", st.fine.grad_tau},
                         {"hess_lambda", st.fine.hess_lambda},
                         {"codazzi", st.codazzi_fine},
                         {"ratio", st.ratio},
                         {"codazzi_ratio", st.codazzi_ratio},
                         {"passed", pass}};
      log << "identities (" << id_text << ", 256 reduced): residual " << st.fine.max() << ", Codazzi "
          << st.codazzi_fine << ", ratios " << st.ratio << " / " << st.codazzi_ratio << (pass ? "  pass" : "  FAIL")
          << "\n";
    } else {
      j["identities"] = {{"skipped", "space forms only"}};
    }
    j["status"] = ok ? "pass" : "fail";
    cmd_detail::write_report(opt.out_dir, "geometry_report.json", j);
    return ok ? exit_code::converged : exit_code::error;
  });
}

inline int cmd_selftest(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const std::vector<SelfTestResult> results = run_selftest();
    bool ok = true;
    Json arr = Json::array();
    for (const SelfTestResult& r : results) {
      log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
      ok = ok && r.passed;
      arr.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    if (!opt.out_dir.empty()) cmd_detail::write_report(opt.out_dir, "selftest.json", {{"command", "selftest"}, {"results", arr}});
    return ok ? exit_code::converged : exit_code::error;
  });
}

// One solve per value of sweep.key, each in out_dir/<index>_<value>/.
inline int cmd_sweep(const CommandOptions& opt, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    KeyValues kv = read_key_values(opt.config_path);
    const std::filesystem::path cfg_path(opt.config_path);
    const std::string base = cfg_path.has_parent_path() ? cfg_path.parent_path().string() : ".";
    const RunConfig cfg = build_config(kv, base);
    const std::string key = opt.sweep_key ? *opt.sweep_key : cfg.sweep_key.value_or("");
    if (key.empty()) throw ConfigError("sweep.key", "missing");
    const std::vector<std::string> values =
        opt.sweep_values ? detail::split_list(*opt.sweep_values) : cfg.sweep_values;
    if (values.empty()) throw ConfigError("sweep.values", "missing");
    KeyValues stripped;
    for (const auto& e : kv) {
      if (e.first.rfind("sweep.", 0) != 0) stripped.push_back(e);
    }

    Json runs = Json::array();
    int worst = exit_code::converged;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::string dir = (std::filesystem::path(opt.out_dir) / (std::to_string(i) + "_" + values[i])).string();
      RunConfig point;
      try {
        point = cmd_detail::apply_flags(build_config(with_override(stripped, key, values[i]), base), opt);
      } catch (const ConfigError& e) {
        throw ConfigError(e.key(), std::string(e.what()) + " (sweep value " + values[i] + ")");
      }
      log << key << " = " << values[i] << ": ";
      const SolveOutcome o = run_solve(point, dir, opt.force, log);
      runs.push_back({{"value", values[i]}, {"status", o.report["status"]}, {"exit_code", o.code}, {"report", dir + "/report.json"}});
      worst = std::max(worst, o.code);
    }
    cmd_detail::write_report(opt.out_dir, "sweep.json", {{"command", "sweep"}, {"key", key}, {"runs", runs}});
    return worst;
  });
}

}  // namespace wcurv
