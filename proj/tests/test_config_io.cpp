#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "wcurv/config.hpp"
#include "wcurv/io.hpp"

using namespace wcurv;

namespace {

const KeyValues kBase = {{"problem.r1", "0.5"}, {"problem.r2", "2"}, {"f.expr", "1/r^2 * exp(1.25 - r)"}};

std::string failing_key(const KeyValues& kv) {
  try {
    build_config(kv);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "wcurv_test_config_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(KeyValues, ParsesCommentsAndWhitespace) {
  const KeyValues kv = parse_key_values("# header\n  warp.kind = hyperbolic  # trailing\n\nproblem.k=2\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].first, "warp.kind");
  EXPECT_EQ(kv[0].second, "hyperbolic");
  EXPECT_EQ(kv[1].second, "2");
}

TEST(KeyValues, Errors) {
  try {
    parse_key_values("a = 1\nnonsense\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "line 2");
  }
  try {
    parse_key_values("a = 1\na = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "a");
  }
  EXPECT_THROW(parse_key_values(" = 3"), ConfigError);
}

TEST(BuildConfig, Defaults) {
  const RunConfig cfg = build_config(kBase);
  EXPECT_EQ(cfg.spec.profile.kind(), WarpKind::euclidean);
  EXPECT_EQ(cfg.spec.q.k, 2);
  EXPECT_EQ(cfg.spec.q.l, 0);
  EXPECT_DOUBLE_EQ(cfg.spec.rm(), 1.25);
  EXPECT_DOUBLE_EQ(cfg.spec.phi_c, 1.0);
  EXPECT_EQ(cfg.mesh.n_theta, 32);
  EXPECT_EQ(cfg.mesh.n_phi, 64);
  EXPECT_FALSE(cfg.mesh.reduced);
  EXPECT_DOUBLE_EQ(cfg.solver.newton_tol, 1e-10);
  EXPECT_DOUBLE_EQ(cfg.monitor.alpha, 1.0);
}

TEST(BuildConfig, AllSections) {
  KeyValues kv = {{"warp.kind", "hyperbolic"},   {"warp.domain", "0.1, 5"}, {"problem.k", "2"},
                  {"problem.l", "0"},            {"problem.r1", "0.5"},      {"problem.r2", "1.5"},
                  {"phi.rm", "0.8"},             {"phi.c", "2"},             {"f.builtin", "round_exponential"},
                  {"f.rm", "0.8"},               {"f.alpha", "2"},           {"mesh.n_theta", "48"},
                  {"mesh.reduced", "true"},      {"mesh.order", "4"},        {"solver.newton_tol", "1e-11"},
                  {"solver.max_newton", "12"},   {"solver.t_step_init", "0.2"}, {"solver.t_step_min", "0.01"},
                  {"monitor.alpha", "0.5"},      {"monitor.A", "3"},         {"monitor.gamma_arg", "r"}};
  const RunConfig cfg = build_config(kv);
  EXPECT_EQ(cfg.spec.profile.kind(), WarpKind::hyperbolic);
  EXPECT_DOUBLE_EQ(cfg.spec.profile.domain().lo, 0.1);
  EXPECT_EQ(cfg.spec.q.l, 0);
  EXPECT_DOUBLE_EQ(cfg.spec.phi_c, 2.0);
  EXPECT_EQ(cfg.mesh.n_phi, 1);
  EXPECT_TRUE(cfg.mesh.reduced);
  EXPECT_EQ(cfg.mesh.order, 4);
  EXPECT_EQ(cfg.solver.max_newton, 12);
  EXPECT_DOUBLE_EQ(cfg.solver.t_step_min, 0.01);
  EXPECT_DOUBLE_EQ(cfg.monitor.A, 3.0);
  EXPECT_EQ(cfg.monitor.gamma_argument, GammaArgument::radius);
  EXPECT_EQ(cfg.entries.size(), kv.size());
}

TEST(BuildConfig, ErrorsNameTheKey) {
  EXPECT_EQ(failing_key(with_override(kBase, "warp.kind", "flat")), "warp.kind");
  EXPECT_EQ(failing_key(with_override(kBase, "warp.domain", "1")), "warp.domain");
  EXPECT_EQ(failing_key(with_override(kBase, "warp.domain", "2, 1")), "warp.domain");
  EXPECT_EQ(failing_key(with_override(with_override(kBase, "warp.kind", "spherical"), "warp.domain", "0, 3")),
            "warp.domain");
  EXPECT_EQ(failing_key(with_override(kBase, "warp.kind", "custom")), "warp.domain");
  EXPECT_EQ(failing_key(with_override(kBase, "problem.r1", "abc")), "problem.r1");
  EXPECT_EQ(failing_key(with_override(kBase, "problem.r1", "3")), "problem.r1");
  EXPECT_EQ(failing_key(with_override(kBase, "problem.k", "1.5")), "problem.k");
  EXPECT_EQ(failing_key(with_override(kBase, "phi.c", "-1")), "phi.c");
  EXPECT_EQ(failing_key(with_override(kBase, "mesh.n_theta", "8")), "mesh.n_theta");
  EXPECT_EQ(failing_key(with_override(kBase, "mesh.n_phi", "7")), "mesh.n_phi");
  EXPECT_EQ(failing_key(with_override(kBase, "mesh.order", "5")), "mesh.order");
  EXPECT_EQ(failing_key(with_override(kBase, "mesh.reduced", "maybe")), "mesh.reduced");
  EXPECT_EQ(failing_key(with_override(kBase, "f.expr", "foo(r)")), "f.expr");
  EXPECT_EQ(failing_key(with_override(kBase, "f.builtin", "round_exponential")), "f.expr");
  EXPECT_EQ(failing_key(with_override(kBase, "f.alpha", "2")), "f.alpha");
  EXPECT_EQ(failing_key(with_override(kBase, "solver.newton_tol", "0")), "solver.newton_tol");
  EXPECT_EQ(failing_key(with_override(kBase, "monitor.gamma_arg", "s")), "monitor.gamma_arg");
  EXPECT_EQ(failing_key(with_override(kBase, "solver.typo", "1")), "solver.typo");
  EXPECT_EQ(failing_key({{"problem.r2", "2"}, {"f.expr", "1"}}), "problem.r1");
  EXPECT_EQ(failing_key({{"problem.r1", "0.5"}, {"problem.r2", "2"}}), "f.expr");
  EXPECT_EQ(failing_key(with_override(kBase, "problem.r2", "")), "problem.r2");
}

TEST(BuildConfig, ManufacturedFromCsv) {
  const RunConfig cfg = load_config(std::string(WCURV_SAMPLES_DIR) + "/manufactured_csv.cfg");
  ASSERT_NE(cfg.spec.f.manufactured(), nullptr);
  EXPECT_TRUE(cfg.spec.f.manufactured()->discrete());
  EXPECT_EQ(failing_key(with_override(kBase, "f.decay", "1")), "f.decay");
}

TEST(BuildConfig, MissingFile) {
  try {
    load_config("/nonexistent/wcurv.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "--config");
  }
}

TEST(BuildConfig, SamplesLoad) {
  for (const char* name : {"closed_form", "hyperbolic_round", "manufactured", "manufactured_csv", "perturbed_sphere",
                           "sweep_alpha", "violates_lower_barrier", "violates_upper_barrier"}) {
    EXPECT_NO_THROW(load_config(std::string(WCURV_SAMPLES_DIR) + "/" + name + ".cfg")) << name;
  }
  EXPECT_THROW(load_config(std::string(WCURV_SAMPLES_DIR) + "/bad_radii.cfg"), ConfigError);
}

TEST(WithOverride, ReplacesOrAppends) {
  const KeyValues a = with_override(kBase, "problem.r1", "0.6");
  EXPECT_EQ(a.size(), kBase.size());
  EXPECT_EQ(a[0].second, "0.6");
  const KeyValues b = with_override(kBase, "phi.c", "2");
  EXPECT_EQ(b.size(), kBase.size() + 1);
  EXPECT_EQ(b.back().first, "phi.c");
}

TEST(Csv, FormatNumberRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1.25, -2.5e-17, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(Csv, Headers) {
  const ScalarField r(SphereMesh::build(16, 1, true), 1.25);
  EXPECT_EQ(field_csv(r).substr(0, field_csv(r).find('\n')), "theta,phi,value");
  const std::string geo = geometry_csv(compute_geometry(r, WarpProfile::euclidean()));
  EXPECT_EQ(geo.substr(0, geo.find('\n')), "theta,phi,r,v,H,kappa1,kappa2,mu1,mu2,tau");
  MonitorRecord m;
  m.t = 0.5;
  const std::string mon = monitor_csv({m});
  EXPECT_EQ(mon.substr(0, mon.find('\n')), "t,r_min,r_max,tau_min,grad_max,kappa_max");
  EXPECT_EQ(std::count(mon.begin(), mon.end(), '\n'), 2);
  EXPECT_EQ(std::count(geo.begin(), geo.end(), '\n'), 17);
}

TEST(Csv, FieldRoundTrip) {
  for (bool reduced : {false, true}) {
    const MeshPtr mesh = SphereMesh::build(16, reduced ? 1 : 8, reduced);
    const ScalarField r = ScalarField::from_function(mesh, [](double t, double p) {
      return 1.0 + 0.1 * std::cos(t) + 0.01 * std::sin(p);
    });
    const auto path = scratch(reduced ? "reduced.csv" : "full.csv");
    write_text(path.string(), field_csv(r));
    const ScalarField back = read_field_csv(path.string());
    ASSERT_EQ(back.size(), r.size());
    EXPECT_EQ(back.mesh().reduced(), reduced);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(back[i], r[i]);
  }
}

TEST(Csv, ReadErrors) {
  EXPECT_THROW(read_field_csv("/nonexistent.csv"), Error);
  const auto empty = scratch("empty.csv");
  write_text(empty.string(), "theta,phi,value\n");
  EXPECT_THROW(read_field_csv(empty.string()), Error);
  const auto bad = scratch("bad.csv");
  write_text(bad.string(), "theta,phi,value\n0.1,0,abc\n");
  EXPECT_THROW(read_field_csv(bad.string()), Error);
  const auto ragged = scratch("ragged.csv");
  write_text(ragged.string(), "theta,phi,value\n0.1,0,1\n0.2,0,1\n0.1,1,1\n");
  EXPECT_THROW(read_field_csv(ragged.string()), Error);
}
