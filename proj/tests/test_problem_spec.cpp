#include <cmath>

#include <gtest/gtest.h>

#include "wcurv/continuation_solver.hpp"
#include "wcurv/problem_spec.hpp"

using namespace wcurv;

namespace {

ProblemSpec closed_form() {
  ProblemSpec s;
  s.r1 = 0.5;
  s.r2 = 2.0;
  s.f = PrescribedF::expression("1/r^2 * exp(1.25 - r)");
  return s;
}

const AssumptionResult& result(const AssumptionReport& rep, const std::string& name) {
  for (const AssumptionResult& a : rep.results) {
    if (a.name == name) return a;
  }
  throw std::runtime_error("no assumption " + name);
}

}  // namespace

TEST(ProblemSpec, DefaultsAndValidation) {
  ProblemSpec s = closed_form();
  EXPECT_DOUBLE_EQ(s.rm(), 1.25);
  EXPECT_NO_THROW(s.validate());
  s.phi_rm = 1.0;
  EXPECT_DOUBLE_EQ(s.rm(), 1.0);

  auto key_of = [](ProblemSpec p) {
    try {
      p.validate();
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string();
  };
  ProblemSpec bad = closed_form();
  bad.r1 = 2.0;
  bad.r2 = 0.5;
  EXPECT_EQ(key_of(bad), "problem.r1");
  bad = closed_form();
  bad.r2 = 20.0;
  EXPECT_EQ(key_of(bad), "problem.r2");
  bad = closed_form();
  bad.phi_rm = 3.0;
  EXPECT_EQ(key_of(bad), "phi.rm");
  bad = closed_form();
  bad.phi_c = 0.0;
  EXPECT_EQ(key_of(bad), "phi.c");
  bad = closed_form();
  bad.q = {3, 0};
  EXPECT_EQ(key_of(bad), "problem.k");
}

TEST(Phi, BarrierProperties) {
  ProblemSpec s = closed_form();
  for (double c : {0.3, 1.0, 4.0}) {
    s.phi_c = c;
    EXPECT_DOUBLE_EQ(s.phi(s.rm()), 1.0);
    for (int i = 0; i <= 100; ++i) {
      const double r = 0.05 + 0.03 * i;
      EXPECT_GT(s.phi(r), 0.0);
      EXPECT_EQ(s.phi(r) >= 1.0, r <= s.rm()) << r;
      EXPECT_LT(s.phi_derivative(r), 0.0);
      const double h = 1e-6;
      EXPECT_NEAR(s.phi_derivative(r), (s.phi(r + h) - s.phi(r - h)) / (2 * h), 1e-7 * s.phi(r) * c);
    }
  }
}

TEST(EvalF, RoundExponential) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::round_exponential(1.25, 1.0);
  EXPECT_NEAR(eval_f(s, 1.25, 0.4, 0.2, 1.0), 0.64, 1e-15);
  EXPECT_DOUBLE_EQ(eval_f(s, 1.25, 0.4, 0.2, 1.0), s.threshold(1.25));
  EXPECT_NEAR(eval_f(s, 1.0, 0.4, 0.2, 1.0), std::exp(0.25), 1e-14);
}

TEST(EvalF, ConstantExpression) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::expression("2");
  EXPECT_DOUBLE_EQ(eval_f(s, 0.7, 1.0, 2.0, 0.5), 2.0);
  s.f = PrescribedF::expression("r - 1");
  EXPECT_THROW(eval_f(s, 0.7, 1.0, 2.0, 0.5), DomainError);
  s.f = PrescribedF::expression("log(r - 1)");
  EXPECT_THROW(eval_f(s, 0.7, 1.0, 2.0, 0.5), DomainError);
}

TEST(BlendFt, Endpoints) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::expression("1/r^2 * (1 + 0.05*sin(th)*cos(ph)) * (2 - nur)");
  EXPECT_DOUBLE_EQ(blend_f_t(s, 0.0, s.rm(), 0.3, 0.4, 0.9), s.threshold(s.rm()));
  EXPECT_DOUBLE_EQ(blend_f_t(s, 0.0, 0.8, 0.3, 0.4, 0.9), blend_f_t(s, 0.0, 0.8, 2.0, 5.0, 0.2));
  EXPECT_DOUBLE_EQ(blend_f_t(s, 1.0, 0.8, 0.3, 0.4, 0.9), eval_f(s, 0.8, 0.3, 0.4, 0.9));
  const double mid = 0.5 * (blend_f_t(s, 0.0, 0.8, 0.3, 0.4, 0.9) + blend_f_t(s, 1.0, 0.8, 0.3, 0.4, 0.9));
  EXPECT_NEAR(blend_f_t(s, 0.5, 0.8, 0.3, 0.4, 0.9), mid, 1e-15 * mid);
}

TEST(BlendFt, AffineInT) {
  ProblemSpec s = closed_form();
  for (double r : {0.6, 1.0, 1.7}) {
    const double f0 = blend_f_t(s, 0.0, r, 1.0, 2.0, 0.7), f1 = blend_f_t(s, 1.0, r, 1.0, 2.0, 0.7);
    for (double t : {0.1, 0.25, 0.6, 0.9}) {
      const double expect = (1 - t) * f0 + t * f1;
      EXPECT_NEAR(blend_f_t(s, t, r, 1.0, 2.0, 0.7), expect, 4e-16 * expect);
    }
  }
}

TEST(Assumptions, ClosedFormMargins) {
  const AssumptionReport rep = check_assumptions(closed_form());
  EXPECT_TRUE(rep.passed());
  EXPECT_FALSE(rep.boundary_case());
  const AssumptionResult& lo = result(rep, "lower_barrier");
  const AssumptionResult& hi = result(rep, "upper_barrier");
  EXPECT_NEAR(lo.margin, std::exp(0.75) - 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(lo.worst.r, 0.5);
  EXPECT_NEAR(hi.margin, 1.0 - std::exp(-0.75), 1e-12);
  EXPECT_DOUBLE_EQ(hi.worst.r, 2.0);
  EXPECT_TRUE(result(rep, "monotonicity").passed);
  EXPECT_GT(result(rep, "monotonicity").margin, 0.0);
  EXPECT_TRUE(result(rep, "positivity").passed);
}

TEST(Assumptions, ThresholdItselfFailsLowerBarrier) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::expression("1/r^2");
  const AssumptionReport rep = check_assumptions(s);
  EXPECT_FALSE(result(rep, "lower_barrier").passed);
  EXPECT_FALSE(result(rep, "upper_barrier").passed);
  EXPECT_TRUE(result(rep, "monotonicity").passed);
  EXPECT_TRUE(result(rep, "monotonicity").boundary_case);
  EXPECT_FALSE(rep.passed());
}

TEST(Assumptions, IncreasingFailsMonotonicity) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::expression("1/r * exp(1.25 - r) * 1/r * exp(3*(r - 1.25)) * exp(-3*(r-1.25)) * r^0.5");
  EXPECT_FALSE(result(check_assumptions(s), "monotonicity").passed);
}

TEST(Assumptions, NegativeFFailsPositivity) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::expression("1.5 - r");
  const AssumptionReport rep = check_assumptions(s);
  EXPECT_FALSE(result(rep, "positivity").passed);
  EXPECT_FALSE(rep.passed());
}

TEST(Assumptions, Violators) {
  ProblemSpec s = closed_form();
  s.f = PrescribedF::expression("0.5/r^2");
  EXPECT_FALSE(result(check_assumptions(s), "lower_barrier").passed);
  EXPECT_TRUE(result(check_assumptions(s), "upper_barrier").passed);
  s.f = PrescribedF::expression("2/r^2");
  EXPECT_TRUE(result(check_assumptions(s), "lower_barrier").passed);
  EXPECT_FALSE(result(check_assumptions(s), "upper_barrier").passed);
}

TEST(Manufactured, ConstantTarget) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 8, false);
  const PrescribedF f = manufacture_f(FExpr::parse("1"), s, *mesh, 0.0);
  for (double r : {0.6, 1.0, 1.5}) {
    EXPECT_NEAR(f.raw(s.profile, s.q, r, 0.3, 0.2, 1.0), 1.0 / (r * r), 1e-14);
  }
  ProblemSpec h = closed_form();
  h.profile = WarpProfile::hyperbolic();
  const PrescribedF fh = manufacture_f(FExpr::parse("0.9"), h, *mesh, 0.0);
  const double c = 0.9;
  for (double r : {0.6, 1.0, 1.5}) {
    const double expect = h.threshold(c) * std::pow(std::sinh(c) / std::sinh(r), 2);
    EXPECT_NEAR(fh.raw(h.profile, h.q, r, 1.0, 0.2, 1.0), expect, 1e-13 * expect);
  }
}

TEST(Manufactured, LambdaPowerTimesFIndependentOfR) {
  ProblemSpec s = closed_form();
  s.profile = WarpProfile::spherical();
  s.r1 = 0.3;
  s.r2 = 1.4;
  const MeshPtr mesh = SphereMesh::build(16, 8, false);
  const PrescribedF f = manufacture_f(FExpr::parse("0.8 + 0.05*cos(th) + 0.02*sin(th)*sin(ph)"), s, *mesh, 0.0);
  for (double th : {0.2, 1.0, 2.5}) {
    const double ref = std::pow(std::sin(0.8), 2) * f.raw(s.profile, s.q, 0.8, th, 0.7, 1.0);
    for (double r : {0.4, 0.6, 1.0, 1.3}) {
      EXPECT_NEAR(std::pow(std::sin(r), 2) * f.raw(s.profile, s.q, r, th, 0.7, 1.0), ref, 1e-14 * ref);
    }
  }
}

TEST(Manufactured, TargetSolvesTheEquation) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(64, 128, false);
  s.f = manufacture_f(FExpr::parse("1 + 0.05*cos(th)"), s, *mesh, 1.0);
  const ScalarField target =
      ScalarField::from_function(mesh, [](double t, double) { return 1.0 + 0.05 * std::cos(t); });
  EXPECT_LE(max_norm(residual(s, 1.0, target).values()), 1e-5);
}

TEST(Manufactured, ZeroDecayIsMonotonicityBoundaryCase) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(32, 1, true);
  s.f = manufacture_f(FExpr::parse("1 + 0.05*cos(th)"), s, *mesh, 0.0);
  const AssumptionReport rep = check_assumptions(s);
  const AssumptionResult& mono = result(rep, "monotonicity");
  EXPECT_TRUE(mono.passed);
  EXPECT_TRUE(mono.boundary_case);
  EXPECT_TRUE(rep.boundary_case());
  // f / threshold is r-independent, so the two barriers cannot both be strict.
  EXPECT_FALSE(result(rep, "lower_barrier").passed && result(rep, "upper_barrier").passed);
}

TEST(Manufactured, PositiveDecayIsStrict) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(32, 1, true);
  s.f = manufacture_f(FExpr::parse("1 + 0.05*cos(th)"), s, *mesh, 1.0);
  const AssumptionReport rep = check_assumptions(s);
  EXPECT_TRUE(rep.passed());
  EXPECT_FALSE(rep.boundary_case());
  EXPECT_GT(result(rep, "monotonicity").margin, 0.0);
}

TEST(Manufactured, Errors) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(16, 8, false);
  EXPECT_THROW(manufacture_f(FExpr::parse("1.9 + 0.2*cos(th)"), s, *mesh, 1.0), ConfigError);
  EXPECT_THROW(manufacture_f(FExpr::parse("r"), s, *mesh, 1.0), ParseError);
  // Strong oscillation leaves the cone.
  EXPECT_THROW(manufacture_f(FExpr::parse("1 + 0.2*cos(6*th)"), s, *SphereMesh::build(64, 1, true), 1.0), ConeError);
}

TEST(Manufactured, DiscreteTargetUsesNearestNode) {
  ProblemSpec s = closed_form();
  const MeshPtr mesh = SphereMesh::build(32, 1, true);
  const ScalarField target =
      ScalarField::from_function(mesh, [](double t, double) { return 1.0 + 0.05 * std::cos(t); });
  s.f = manufacture_f(target, s, 1.0);
  const ManufacturedF* m = s.f.manufactured();
  ASSERT_NE(m, nullptr);
  EXPECT_TRUE(m->discrete());
  EXPECT_DOUBLE_EQ(m->r_star(mesh->theta(5) + 0.3 * mesh->d_theta(), 1.0), target[5]);
  EXPECT_LE(max_norm(residual(s, 1.0, target).values()), 1e-12);
}
