#pragma once

// Quantities bounded by the a priori estimates, evaluated on a computed
// graph: C^0 barrier, support function, gradient, largest curvature, and the
// auxiliary test functions
//   Phi = -ln tau + gamma(s),  gamma(s) = alpha / s,  s = Lambda or r,
//   P   = ln kappa_max - ln(tau - a) + A Lambda,  a = min(tau) / 2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wcurv/continuation_solver.hpp"
#include "wcurv/hypersurface_geometry.hpp"
#include "wcurv/problem_spec.hpp"

namespace wcurv {

enum class GammaArgument { capital_lambda, radius };

struct MonitorOptions {
  double alpha = 1.0;
  double A = 1.0;
  GammaArgument gamma_argument = GammaArgument::capital_lambda;
};

struct NodeMax {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t node = 0;
};

struct MonitorRecord {
  double t = 0.0;
  double r_min = 0.0, r_max = 0.0;
  double tau_min = 0.0;
  double v_max = 0.0;
  double grad_max = 0.0;
  double kappa_max = 0.0;
  double mu_min = 0.0;
  double a = 0.0;
  NodeMax phi_test_max;
  NodeMax p_test_max;
  bool below_r1 = false;  // r_min <= r1
  bool above_r2 = false;  // r_max >= r2

  bool barrier_ok() const { return !below_r1 && !above_r2; }
};

inline NodeMax argmax(const std::vector<double>& v) {
  NodeMax m;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > m.value) m = {v[i], i};
  }
  return m;
}

inline std::vector<double> phi_test_field(const GraphGeometry& geo, double alpha, GammaArgument arg) {
  std::vector<double> out(geo.size());
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const double s = arg == GammaArgument::capital_lambda ? geo.capital_lambda[i] : geo.nodes[i].r;
    out[i] = -std::log(geo.nodes[i].tau) + alpha / s;
  }
  return out;
}

// With include_tau = false the -ln(tau - a) term is dropped.
inline std::vector<double> p_test_field(const GraphGeometry& geo, double A, double a, bool include_tau = true) {
  std::vector<double> out(geo.size());
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const NodeGeometry& ng = geo.nodes[i];
    double p = std::log(ng.kappa[0]) + A * geo.capital_lambda[i];
    if (include_tau) p -= std::log(ng.tau - a);
    out[i] = p;
  }
  return out;
}

inline MonitorRecord monitor(const GraphGeometry& geo, const ProblemSpec& spec, double t,
                             const MonitorOptions& opt = {}) {
  MonitorRecord rec;
  rec.t = t;
  rec.r_min = rec.tau_min = rec.mu_min = std::numeric_limits<double>::infinity();
  rec.r_max = rec.v_max = rec.grad_max = rec.kappa_max = -std::numeric_limits<double>::infinity();
  for (const NodeGeometry& ng : geo.nodes) {
    rec.r_min = std::min(rec.r_min, ng.r);
    rec.r_max = std::max(rec.r_max, ng.r);
    rec.tau_min = std::min(rec.tau_min, ng.tau);
    rec.v_max = std::max(rec.v_max, ng.v);
    rec.grad_max = std::max(rec.grad_max, ng.grad_norm);
    rec.kappa_max = std::max(rec.kappa_max, ng.kappa[0]);
    rec.mu_min = std::min(rec.mu_min, ng.mu[0]);
  }
  rec.a = 0.5 * rec.tau_min;
  rec.phi_test_max = argmax(phi_test_field(geo, opt.alpha, opt.gamma_argument));
  rec.p_test_max = argmax(p_test_field(geo, opt.A, rec.a));
  rec.below_r1 = rec.r_min <= spec.r1;
  rec.above_r2 = rec.r_max >= spec.r2;
  return rec;
}

inline MonitorRecord monitor(const ContinuationState& s, const ProblemSpec& spec, const MonitorOptions& opt = {}) {
  return monitor(compute_geometry(s.r_field, spec.profile), spec, s.t, opt);
}

struct StabilityRow {
  MeshSpec mesh;
  bool converged = false;
  double tau_min = 0.0;
  double grad_max = 0.0;
  double kappa_max = 0.0;
};

struct StabilityTable {
  std::vector<StabilityRow> rows;
  // Relative change between the two finest resolutions.
  double tau_change = 0.0;
  double grad_change = 0.0;
  double kappa_change = 0.0;
  bool unstable = false;
  std::string message;
};

inline double relative_change(double coarse, double fine) {
  const double scale = std::max(std::abs(fine), 1e-12);
  return std::abs(fine - coarse) / scale;
}

// Flags "estimate instability" when kappa_max moves by more than `tol`
// (relative) between the two finest rows, or a row did not converge.
inline void assess_stability(StabilityTable& table, double tol = 0.01) {
  table.unstable = false;
  table.message.clear();
  for (const StabilityRow& row : table.rows) {
    if (!row.converged) {
      table.unstable = true;
      table.message = "estimate instability: no converged solution at " + row.mesh.label();
      return;
    }
  }
  if (table.rows.size() < 2) return;
  const StabilityRow& c = table.rows[table.rows.size() - 2];
  const StabilityRow& f = table.rows.back();
  table.tau_change = relative_change(c.tau_min, f.tau_min);
  table.grad_change = relative_change(c.grad_max, f.grad_max);
  table.kappa_change = relative_change(c.kappa_max, f.kappa_max);
  if (!(table.kappa_change <= tol)) {
    table.unstable = true;
    table.message = "estimate instability: kappa_max changes by " + std::to_string(table.kappa_change) +
                    " between " + c.mesh.label() + " and " + f.mesh.label();
  }
}

// Solves at every resolution (coarse to fine) and tabulates the monitored
// bounds at t = 1.
inline StabilityTable refinement_stability(const ProblemSpec& spec, const std::vector<MeshSpec>& resolutions,
                                           const SolverOptions& opt = {}, double tol = 0.01) {
  StabilityTable table;
  for (const MeshSpec& ms : resolutions) {
    StabilityRow row;
    row.mesh = ms;
    const ContinuationResult res = continuation_solve(spec, ms.build(), opt);
    if (!res.converged) throw SolverError(SolverError::Kind::breakdown, ms.label() + ": " + res.message);
    row.converged = true;
    const MonitorRecord rec = monitor(res.final_state, spec);
    row.tau_min = rec.tau_min;
    row.grad_max = rec.grad_max;
    row.kappa_max = rec.kappa_max;
    table.rows.push_back(row);
  }
  assess_stability(table, tol);
  return table;
}

}  // namespace wcurv
