#pragma once

// Nodal residual of sigma_k/sigma_l(mu(eta)) = f^t, a damped Newton solver
// with cone and barrier safeguards, and continuation in t from the round
// solution r = rm at t = 0.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wcurv/errors.hpp"
#include "wcurv/hypersurface_geometry.hpp"
#include "wcurv/problem_spec.hpp"
#include "wcurv/sphere_mesh.hpp"

namespace wcurv {

struct SolverOptions {
  double newton_tol = 1e-10;
  int max_newton = 30;
  double t_step_init = 0.1;
  double t_step_min = 1e-3;
  double backtrack = 0.5;
  int max_halvings = 20;
  double jacobian_fd_step = 1e-6;  // scaled by (1 + |r|)
  double guard_fraction = 0.05;
  int easy_iterations = 4;

  void validate() const {
    if (!(newton_tol > 0.0)) throw ConfigError("solver.newton_tol", "must be positive");
    if (max_newton < 1) throw ConfigError("solver.max_newton", "must be positive");
    if (!(t_step_init > 0.0) || t_step_init > 1.0) throw ConfigError("solver.t_step_init", "must be in (0, 1]");
    if (!(t_step_min > 0.0)) throw ConfigError("solver.t_step_min", "must be positive");
    if (t_step_min > t_step_init) throw ConfigError("solver.t_step_min", "must not exceed solver.t_step_init");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("solver.backtrack", "must be in (0, 1)");
    if (!(jacobian_fd_step > 0.0)) throw ConfigError("solver.jacobian_fd_step", "must be positive");
  }
};

struct ContinuationState {
  double t = 0.0;
  ScalarField r_field;
  int newton_iters = 0;
  double residual_norm = 0.0;
  bool admissible = false;
};

inline double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Residual at one node; throws ConeError (with the node) outside Gamma_k.
inline double residual_at(const ProblemSpec& spec, double t, const SphereMesh& mesh,
                          const std::vector<double>& r, std::size_t i) {
  const NodeGeometry ng = geometry_at(mesh, r, spec.profile, i);
  if (!admissible(ng, spec.q.k)) throw ConeError("mu(eta) leaves the Garding cone at " + node_label(mesh, i), i);
  return curvature_quotient(ng, spec.q) - blend_f_t(spec, t, r[i], mesh.theta(i), mesh.phi(i), ng.nu_r);
}

inline ScalarField residual(const ProblemSpec& spec, double t, const ScalarField& r) {
  const SphereMesh& mesh = r.mesh();
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = residual_at(spec, t, mesh, r.values(), i);
  return ScalarField(r.mesh_ptr(), std::move(out));
}

// dependents[j]: nodes whose residual reads node j.
inline std::vector<std::vector<std::size_t>> stencil_dependents(const SphereMesh& mesh) {
  std::vector<std::vector<std::size_t>> dep(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    for (std::size_t j : mesh.stencil(i)) dep[j].push_back(i);
  }
  for (auto& d : dep) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
  return dep;
}

// Column j = (F(r + h e_j) - F(r - h e_j)) / 2h over the nodes that read j.
// A side that leaves the cone or the domain is replaced by the base point.
inline Eigen::MatrixXd jacobian_fd(const ProblemSpec& spec, double t, const ScalarField& r,
                                   const SolverOptions& opt = {}) {
  const SphereMesh& mesh = r.mesh();
  const std::size_t n = r.size();
  const ScalarField base = residual(spec, t, r);
  const auto dep = stencil_dependents(mesh);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> work = r.values();
  std::vector<double> plus, minus;

  auto side = [&](double value, std::size_t j, std::vector<double>& out) {
    work[j] = value;
    out.clear();
    try {
      for (std::size_t i : dep[j]) out.push_back(residual_at(spec, t, mesh, work, i));
    } catch (const Error&) {
      work[j] = r[j];
      return false;
    }
    work[j] = r[j];
    return true;
  };

  for (std::size_t j = 0; j < n; ++j) {
    const double h = opt.jacobian_fd_step * (1.0 + std::abs(r[j]));
    const bool ok_p = side(r[j] + h, j, plus);
    const bool ok_m = side(r[j] - h, j, minus);
    if (!ok_p && !ok_m) {
      throw SolverError(SolverError::Kind::cone,
                        "Jacobian column cannot be formed inside the cone at " + node_label(mesh, j));
    }
    for (std::size_t a = 0; a < dep[j].size(); ++a) {
      const std::size_t i = dep[j][a];
      double value;
      if (ok_p && ok_m) value = (plus[a] - minus[a]) / (2.0 * h);
      else if (ok_p) value = (plus[a] - base[i]) / h;
      else value = (base[i] - minus[a]) / h;
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    }
  }
  return J;
}

struct NewtonStats {
  int iterations = 0;
  double residual_norm = 0.0;
  std::vector<double> residual_history;
};

struct NewtonResult {
  ScalarField r;
  NewtonStats stats;
};

inline std::pair<double, double> guard_band(const ProblemSpec& spec, const SolverOptions& opt) {
  const double delta = opt.guard_fraction * (spec.r2 - spec.r1);
  return {spec.r1 - delta, spec.r2 + delta};
}

inline NewtonResult newton_solve(const ProblemSpec& spec, double t, const ScalarField& r_init,
                                 const SolverOptions& opt = {}) {
  const SphereMesh& mesh = r_init.mesh();
  const Interval dom = spec.profile.domain();
  for (std::size_t i = 0; i < r_init.size(); ++i) {
    if (!dom.contains(r_init[i])) {
      throw DomainError("initial guess leaves the profile domain at " + node_label(mesh, i));
    }
  }
  const auto [g_lo, g_hi] = guard_band(spec, opt);
  auto inside_guard = [&](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x > g_lo && x < g_hi; });
  };

  NewtonResult out{r_init, {}};
  ScalarField F = residual(spec, t, out.r);
  double norm = max_norm(F.values());
  out.stats.residual_history.push_back(norm);

  for (int it = 0;; ++it) {
    if (norm <= opt.newton_tol) {
      out.stats.residual_norm = norm;
      return out;
    }
    if (it >= opt.max_newton) {
      throw SolverError(SolverError::Kind::max_iterations,
                        "Newton did not converge in " + std::to_string(opt.max_newton) +
                            " iterations (residual " + std::to_string(norm) + ")");
    }
    const Eigen::MatrixXd J = jacobian_fd(spec, t, out.r, opt);
    const Eigen::Map<const Eigen::VectorXd> Fv(F.values().data(), static_cast<Eigen::Index>(F.size()));
    const Eigen::VectorXd dx = J.partialPivLu().solve(-Fv);
    if (!dx.allFinite()) throw SolverError(SolverError::Kind::singular, "singular Newton system");

    double step = 1.0;
    bool accepted = false;
    SolverError::Kind reason = SolverError::Kind::line_search;
    std::vector<double> trial(out.r.size());
    for (int halving = 0; halving <= opt.max_halvings; ++halving, step *= opt.backtrack) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = out.r[i] + step * dx(static_cast<Eigen::Index>(i));
      if (!inside_guard(trial)) {
        reason = SolverError::Kind::barrier_guard;
        continue;
      }
      ScalarField trial_field(out.r.mesh_ptr(), trial);
      ScalarField trial_F;
      try {
        trial_F = residual(spec, t, trial_field);
      } catch (const ConeError&) {
        reason = SolverError::Kind::cone;
        continue;
      } catch (const DomainError&) {
        reason = SolverError::Kind::domain;
        continue;
      }
      const double trial_norm = max_norm(trial_F.values());
      if (!std::isfinite(trial_norm)) continue;
      if (trial_norm < norm || trial_norm <= opt.newton_tol) {
        out.r = std::move(trial_field);
        F = std::move(trial_F);
        norm = trial_norm;
        accepted = true;
        break;
      }
      reason = SolverError::Kind::line_search;
    }
    if (!accepted) {
      throw SolverError(reason, "line search failed after " + std::to_string(opt.max_halvings) +
                                    " halvings (residual " + std::to_string(norm) + ")");
    }
    out.stats.iterations = it + 1;
    out.stats.residual_history.push_back(norm);
  }
}

struct ContinuationResult {
  bool converged = false;
  ContinuationState final_state;
  std::vector<ContinuationState> history;
  int total_newton = 0;
  std::optional<std::pair<double, double>> failed_interval;
  std::string message;
};

using StateObserver = std::function<void(const ContinuationState&)>;

// Continues from r = rm at t = 0 to t = 1. The t-step halves on Newton
// failure and doubles (up to t_step_init) after two consecutive solves with
// at most easy_iterations iterations.
inline ContinuationResult continuation_solve(const ProblemSpec& spec, const MeshPtr& mesh,
                                             const SolverOptions& opt = {},
                                             const StateObserver& observer = {}) {
  opt.validate();
  ContinuationResult res;
  auto accept = [&](double t, NewtonResult&& nr) {
    ContinuationState s;
    s.t = t;
    s.r_field = std::move(nr.r);
    s.newton_iters = nr.stats.iterations;
    s.residual_norm = nr.stats.residual_norm;
    s.admissible = true;
    res.total_newton += s.newton_iters;
    if (observer) observer(s);
    res.history.push_back(s);
    res.final_state = s;
  };

  try {
    accept(0.0, newton_solve(spec, 0.0, ScalarField(mesh, spec.rm()), opt));
  } catch (const Error& e) {
    res.message = std::string("t = 0 solve failed: ") + e.what();
    res.failed_interval = std::make_pair(0.0, 0.0);
    return res;
  }

  double t = 0.0, dt = opt.t_step_init;
  int easy = 0;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    try {
      NewtonResult nr = newton_solve(spec, t_next, res.final_state.r_field, opt);
      const int iters = nr.stats.iterations;
      accept(t_next, std::move(nr));
      t = t_next;
      if (iters <= opt.easy_iterations) {
        if (++easy >= 2) {
          dt = std::min(2.0 * dt, opt.t_step_init);
          easy = 0;
        }
      } else {
        easy = 0;
      }
    } catch (const Error& e) {
      easy = 0;
      dt *= 0.5;
      if (dt < opt.t_step_min) {
        res.failed_interval = std::make_pair(t, t_next);
        res.message = "continuation breakdown on [" + std::to_string(t) + ", " + std::to_string(t_next) +
                      "]: " + e.what();
        return res;
      }
    }
  }
  res.converged = true;
  return res;
}

}  // namespace wcurv
