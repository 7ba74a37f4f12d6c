#pragma once

// Quick property checks run by `wcurv selftest`.

#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wcurv/continuation_solver.hpp"
#include "wcurv/estimate_monitor.hpp"
#include "wcurv/identity_checks.hpp"
#include "wcurv/problem_spec.hpp"
#include "wcurv/symmetric_functions.hpp"

namespace wcurv {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace selftest_detail {

inline double brute_sigma(const std::vector<double>& mu, int k) {
  const std::size_t n = mu.size();
  double s = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) p *= mu[i];
    }
    s += p;
  }
  return s;
}

inline std::vector<double> random_cone_point(std::mt19937_64& rng, int n, int k) {
  std::uniform_real_distribution<double> u(-0.5, 2.0);
  for (;;) {
    std::vector<double> mu(static_cast<std::size_t>(n));
    for (double& x : mu) x = u(rng);
    if (in_gamma_k(std::span<const double>(mu), k)) return mu;
  }
}

// Fourth-order central difference of G in coordinate i. The step shrinks
// from 1e-2 (1 + |mu_i|) and the estimate that agrees best with the next
// smaller step is kept. Empty when no stencil fits in the cone.
inline std::optional<double> fd_partial(const std::vector<double>& mu, QuotientOrder q, std::size_t i) {
  auto estimate = [&](double h) -> std::optional<double> {
    double vals[4];
    const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
    for (int j = 0; j < 4; ++j) {
      auto p = mu;
      p[i] += offs[j] * h;
      if (!in_gamma_k(std::span<const double>(p), q.k)) return std::nullopt;
      vals[j] = G_value(std::span<const double>(p), q);
    }
    return (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h);
  };
  std::optional<double> best, prev;
  double best_gap = std::numeric_limits<double>::infinity();
  double h = 1e-2 * (1.0 + std::abs(mu[i]));
  for (int level = 0; level < 16; ++level, h *= 0.5) {
    const auto cur = estimate(h);
    if (cur && prev && std::abs(*cur - *prev) < best_gap) {
      best_gap = std::abs(*cur - *prev);
      best = cur;
    }
    prev = cur;
  }
  return best;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace selftest_detail

inline std::vector<SelfTestResult> run_selftest() {
  using namespace selftest_detail;
  std::vector<SelfTestResult> out;
  auto record = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    SelfTestResult r;
    r.name = name;
    try {
      auto [ok, detail] = body();
      r.passed = ok;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(r);
  };
  std::mt19937_64 rng(20240611);

  record("sigma recurrence vs subset enumeration", [&] {
    double worst = 0.0;
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 2; n <= 8; ++n) {
      std::vector<double> mu(static_cast<std::size_t>(n));
      for (double& x : mu) x = u(rng);
      for (int k = 0; k <= n; ++k) {
        worst = std::max(worst, std::abs(sigma(std::span<const double>(mu), k) - brute_sigma(mu, k)));
      }
    }
    return std::make_pair(worst <= 1e-12, "max error " + num(worst));
  });

  record("G gradient vs finite differences", [&] {
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 3 + trial % 4;
      const QuotientOrder q{n, trial % (n - 1)};
      auto mu = random_cone_point(rng, n, q.k);
      const auto grad = G_gradient_diag(std::span<const double>(mu), q);
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto fd = fd_partial(mu, q, i);
        if (!fd) continue;
        worst = std::max(worst, std::abs(*fd - grad[i]) / std::max(std::abs(grad[i]), 1e-3));
      }
    }
    return std::make_pair(worst <= 1e-6, "max relative error " + num(worst));
  });

  record("constant graphs reproduce the round threshold", [&] {
    double worst = 0.0;
    const auto mesh = SphereMesh::build(16, 1, true);
    for (const WarpProfile& prof :
         {WarpProfile::euclidean(), WarpProfile::spherical(), WarpProfile::hyperbolic()}) {
      for (double c : {0.3, 0.7, 1.2}) {
        const GraphGeometry geo = compute_geometry(ScalarField(mesh, c), prof);
        const double thr = round_threshold(prof, {2, 0}, c);
        for (const NodeGeometry& ng : geo.nodes) {
          worst = std::max(worst, std::abs(curvature_quotient(ng, {2, 0}) - thr) / thr);
        }
      }
    }
    return std::make_pair(worst <= 1e-10, "max relative error " + num(worst));
  });

  record("shape operator vs extrinsic oracle", [&] {
    const auto mesh = SphereMesh::build(32, 64, false);
    const ScalarField r = ScalarField::from_function(
        mesh, [](double t, double p) { return 1.0 + 0.1 * std::sin(t) * std::cos(p); });
    const GraphGeometry geo = compute_geometry(r, WarpProfile::euclidean());
    const double err = oracle_relative_error(geo, extrinsic_oracle_euclidean(r));
    return std::make_pair(err <= 1e-5, "relative error " + num(err));
  });

  record("support-function and Codazzi identities refine", [&] {
    const RefinementStudy st =
        identity_refinement(WarpProfile::euclidean(), [](double t) { return 1.0 + 0.05 * std::cos(t); }, 64);
    return std::make_pair(!st.too_coarse && st.fine.max() <= 1e-4 && st.codazzi_fine <= 1e-4,
                          "fine residual " + num(st.fine.max()) + ", ratio " + num(st.ratio));
  });

  ProblemSpec closed;
  closed.r1 = 0.5;
  closed.r2 = 2.0;
  closed.f = PrescribedF::expression("1/r^2 * exp(1.25 - r)");

  record("assumptions of the closed-form example", [&] {
    const AssumptionReport rep = check_assumptions(closed);
    ProblemSpec eq = closed;
    eq.f = PrescribedF::expression("1/r^2");
    const bool equality_fails = !check_assumptions(eq).results[0].passed;
    return std::make_pair(rep.passed() && equality_fails,
                          "lower margin " + num(rep.results[0].margin) + ", upper margin " + num(rep.results[1].margin));
  });

  record("closed-form continuation", [&] {
    const ContinuationResult res = continuation_solve(closed, SphereMesh::build(32, 1, true));
    double err = 0.0;
    for (double v : res.final_state.r_field.values()) err = std::max(err, std::abs(v - 1.25));
    return std::make_pair(res.converged && err <= 1e-6, "max |r - 1.25| " + num(err));
  });

  record("t = 0 solution is the round graph", [&] {
    const auto mesh = SphereMesh::build(32, 1, true);
    const ScalarField start =
        ScalarField::from_function(mesh, [](double t, double) { return 1.35 + 0.05 * std::cos(t); });
    const NewtonResult nr = newton_solve(closed, 0.0, start);
    double err = 0.0;
    for (double v : nr.r.values()) err = std::max(err, std::abs(v - closed.rm()));
    return std::make_pair(err <= 1e-8, "max |r - rm| " + num(err));
  });

  record("manufactured solution is recovered", [&] {
    const auto mesh = SphereMesh::build(64, 1, true);
    ProblemSpec p = closed;
    p.f = manufacture_f(FExpr::parse("1 + 0.05*cos(th)"), p, *mesh, 1.0);
    const ContinuationResult res = continuation_solve(p, mesh);
    double err = 0.0;
    for (std::size_t i = 0; i < mesh->size(); ++i) {
      err = std::max(err, std::abs(res.final_state.r_field[i] - (1.0 + 0.05 * std::cos(mesh->theta(i)))));
    }
    return std::make_pair(res.converged && err <= 1e-6, "max |r - r*| " + num(err));
  });

  return out;
}

}  // namespace wcurv
