#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wcurv/continuation_solver.hpp"
#include "wcurv/estimate_monitor.hpp"

using namespace wcurv;

namespace {

ProblemSpec closed_form() {
  ProblemSpec s;
  s.r1 = 0.5;
  s.r2 = 2.0;
  s.f = PrescribedF::expression("1/r^2 * exp(1.25 - r)");
  return s;
}

double max_deviation(const ScalarField& r, double c) {
  double m = 0.0;
  for (double x : r.values()) m = std::max(m, std::abs(x - c));
  return m;
}

}  // namespace

TEST(Residual, VanishesAtRoundSolutions) {
  const ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 8, false);
  EXPECT_LE(max_norm(residual(s, 0.0, ScalarField(mesh, s.rm())).values()), 1e-14);
  EXPECT_LE(max_norm(residual(s, 1.0, ScalarField(mesh, 1.25)).values()), 1e-14);
  EXPECT_GT(max_norm(residual(s, 1.0, ScalarField(mesh, 1.0)).values()), 1e-2);
}

TEST(Jacobian, InvertibleAtStart) {
  const ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 16, false);
  const Eigen::MatrixXd J = jacobian_fd(s, 0.0, ScalarField(mesh, s.rm()));
  ASSERT_EQ(J.rows(), static_cast<Eigen::Index>(mesh->size()));
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const double smin = svd.singularValues().minCoeff();
  EXPECT_GT(smin, 0.1);
  EXPECT_LT(svd.singularValues().maxCoeff() / smin, 1e6);
}

TEST(Jacobian, MatchesDirectionalDifference) {
  const ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 16, false);
  const ScalarField r = ScalarField::from_function(mesh, [](double t, double p) {
    return 1.1 + 0.05 * std::cos(t) + 0.02 * std::sin(t) * std::sin(p);
  });
  const Eigen::MatrixXd J = jacobian_fd(s, 0.7, r);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd d(static_cast<Eigen::Index>(r.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = u(rng);
  const double h = 1e-6;
  std::vector<double> plus = r.values(), minus = r.values();
  for (std::size_t i = 0; i < plus.size(); ++i) {
    plus[i] += h * d(static_cast<Eigen::Index>(i));
    minus[i] -= h * d(static_cast<Eigen::Index>(i));
  }
  const ScalarField Fp = residual(s, 0.7, ScalarField(mesh, plus));
  const ScalarField Fm = residual(s, 0.7, ScalarField(mesh, minus));
  const Eigen::VectorXd Jd = J * d;
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR((Fp[i] - Fm[i]) / (2 * h), Jd(static_cast<Eigen::Index>(i)), 1e-4 * (1 + std::abs(Jd(static_cast<Eigen::Index>(i)))));
  }
}

TEST(Jacobian, StepHalvingBarelyMovesNewtonStep) {
  const ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 16, false);
  const ScalarField r = ScalarField::from_function(mesh, [](double t, double) { return 1.1 + 0.05 * std::cos(t); });
  const ScalarField F = residual(s, 1.0, r);
  const Eigen::Map<const Eigen::VectorXd> Fv(F.values().data(), static_cast<Eigen::Index>(F.size()));
  SolverOptions a, b;
  b.jacobian_fd_step = 0.5 * a.jacobian_fd_step;
  const Eigen::VectorXd da = jacobian_fd(s, 1.0, r, a).partialPivLu().solve(-Fv);
  const Eigen::VectorXd db = jacobian_fd(s, 1.0, r, b).partialPivLu().solve(-Fv);
  EXPECT_LE((da - db).lpNorm<Eigen::Infinity>(), 1e-4 * da.lpNorm<Eigen::Infinity>());
}

TEST(Newton, ConvergesFromPerturbedRound) {
  const ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 16, false);
  const NewtonResult nr = newton_solve(s, 0.0, ScalarField(mesh, s.rm() + 0.1));
  EXPECT_LE(nr.stats.residual_norm, 1e-10);
  EXPECT_LE(max_deviation(nr.r, s.rm()), 1e-9);
  EXPECT_GT(nr.stats.iterations, 0);
  EXPECT_EQ(nr.stats.residual_history.size(), static_cast<std::size_t>(nr.stats.iterations + 1));
}

TEST(Newton, SolvesClosedFormFromUnitSphere) {
  const ProblemSpec s = closed_form();
  const NewtonResult nr = newton_solve(s, 1.0, ScalarField(SphereMesh::build(16, 16, false), 1.0));
  EXPECT_LE(max_deviation(nr.r, 1.25), 1e-9);
}

TEST(Newton, InitialGuessOutsideDomainThrows) {
  ProblemSpec s = closed_form();
  s.profile = WarpProfile::euclidean({0.1, 3.0});
  std::vector<double> r(SphereMesh::build(16, 16, false)->size(), 1.0);
  r[4] = 5.0;
  EXPECT_THROW(newton_solve(s, 0.0, ScalarField(SphereMesh::build(16, 16, false), r)), DomainError);
}

TEST(Newton, IterationCapThrows) {
  const ProblemSpec s = closed_form();
  SolverOptions opt;
  opt.max_newton = 1;
  try {
    newton_solve(s, 1.0, ScalarField(SphereMesh::build(16, 16, false), 0.8), opt);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::max_iterations);
  }
}

TEST(Continuation, ClosedForm) {
  const ProblemSpec s = closed_form();
  const ContinuationResult res = continuation_solve(s, SphereMesh::build(32, 64, false));
  ASSERT_TRUE(res.converged) << res.message;
  EXPECT_DOUBLE_EQ(res.final_state.t, 1.0);
  EXPECT_LE(max_deviation(res.final_state.r_field, 1.25), 1e-6);
  EXPECT_LE(res.total_newton, 20);
  EXPECT_FALSE(res.failed_interval.has_value());
}

TEST(Continuation, ManufacturedReduced) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(128, 1, true);
  auto exact = [](double t) { return 1.0 + 0.05 * std::cos(t); };
  s.f = manufacture_f(FExpr::parse("1 + 0.05*cos(th)"), s, *mesh, 1.0);
  const ContinuationResult res = continuation_solve(s, mesh);
  ASSERT_TRUE(res.converged) << res.message;
  double err = 0.0;
  for (std::size_t i = 0; i < mesh->size(); ++i) {
    err = std::max(err, std::abs(res.final_state.r_field[i] - exact(mesh->theta(i))));
  }
  EXPECT_LE(err, 1e-4);
}

TEST(Continuation, StartIsUniqueUpToTolerance) {
  const ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 16, false);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<ScalarField> sols;
  for (int k = 0; k < 5; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const ScalarField start = ScalarField::from_function(mesh, [&](double t, double p) {
      return s.rm() + a + 0.2 * b * std::cos(t) + 0.1 * c * std::sin(t) * std::cos(p);
    });
    sols.push_back(newton_solve(s, 0.0, start).r);
  }
  for (const ScalarField& r : sols) EXPECT_LE(max_deviation(r, s.rm()), 1e-8);
}

TEST(Continuation, BarrierHoldsAtEveryAcceptedState) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(64, 1, true);
  s.f = manufacture_f(FExpr::parse("1 + 0.05*cos(th)"), s, *mesh, 1.0);
  ASSERT_TRUE(check_assumptions(s).passed());
  int seen = 0;
  const ContinuationResult res = continuation_solve(s, mesh, {}, [&](const ContinuationState& st) {
    ++seen;
    const MonitorRecord rec = monitor(st, s);
    EXPECT_TRUE(rec.barrier_ok()) << "t = " << st.t;
    EXPECT_GT(rec.r_min, s.r1);
    EXPECT_LT(rec.r_max, s.r2);
    EXPECT_LE(max_norm(residual(s, st.t, st.r_field).values()), st.residual_norm + 1e-12);
  });
  ASSERT_TRUE(res.converged);
  EXPECT_EQ(static_cast<std::size_t>(seen), res.history.size());
  for (std::size_t i = 1; i < res.history.size(); ++i) EXPECT_GT(res.history[i].t, res.history[i - 1].t);
}

TEST(Continuation, UpperViolatorDoesNotConvergeInsideTheBand) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::expression("2/r^2");
  SolverOptions opt;
  opt.t_step_min = 1e-2;
  const ContinuationResult res = continuation_solve(s, SphereMesh::build(16, 16, false), opt);
  if (res.converged) {
    const MonitorRecord rec = monitor(res.final_state, s);
    EXPECT_FALSE(rec.barrier_ok());
  } else {
    EXPECT_TRUE(res.failed_interval.has_value());
    EXPECT_NE(res.message.find("breakdown"), std::string::npos);
  }
}

TEST(SolverOptions, Validation) {
  SolverOptions opt;
  opt.newton_tol = -1.0;
  EXPECT_THROW(opt.validate(), ConfigError);
  opt = {};
  opt.t_step_min = 0.5;
  opt.t_step_init = 0.1;
  EXPECT_THROW(opt.validate(), ConfigError);
}
