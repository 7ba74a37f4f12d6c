// wcurv: solve sigma_k/sigma_l(mu(eta)) = f for star-shaped graphs in a
// warped product and check the geometry it relies on.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wcurv/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prescribed Weingarten curvature of star-shaped graphs in warped products"};
  app.require_subcommand(1);

  wcurv::CommandOptions opt;
  double alpha = 0.0, A = 0.0;
  std::string sweep_key, sweep_values;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config_path, "key=value configuration file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  };

  auto* solve = app.add_subcommand("solve", "continuation solve from the round graph");
  add_common(solve, true);
  solve->add_flag("--force", opt.force, "proceed past failed assumptions");
  auto* solve_alpha = solve->add_option("--alpha", alpha, "gamma(s) = alpha / s in the gradient test function");
  auto* solve_A = solve->add_option("--A", A, "coefficient of Lambda in the curvature test function");

  auto* check = app.add_subcommand("check-assumptions", "sampled check of the barrier and monotonicity conditions");
  add_common(check, true);

  auto* verify = app.add_subcommand("verify-geometry", "oracle and identity checks of the graph geometry");
  add_common(verify, true);

  auto* self = app.add_subcommand("selftest", "run the built-in property suite");
  self->add_option("--out", opt.out_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "one solve per value of a config key");
  add_common(sweep, true);
  sweep->add_flag("--force", opt.force, "proceed past failed assumptions");
  auto* sweep_alpha = sweep->add_option("--alpha", alpha, "gamma(s) = alpha / s in the gradient test function");
  auto* sweep_A = sweep->add_option("--A", A, "coefficient of Lambda in the curvature test function");
  auto* sweep_key_opt = sweep->add_option("--key", sweep_key, "config key to vary (default: sweep.key)");
  auto* sweep_values_opt = sweep->add_option("--values", sweep_values, "comma-separated values (default: sweep.values)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wcurv::exit_code::config_error;
  }

  if ((solve_alpha->count() > 0) || (sweep_alpha->count() > 0)) opt.alpha = alpha;
  if ((solve_A->count() > 0) || (sweep_A->count() > 0)) opt.A = A;
  if (sweep_key_opt->count() > 0) opt.sweep_key = sweep_key;
  if (sweep_values_opt->count() > 0) opt.sweep_values = sweep_values;

  if (*solve) return wcurv::cmd_solve(opt, std::cout, std::cerr);
  if (*check) return wcurv::cmd_check_assumptions(opt, std::cout, std::cerr);
  if (*verify) return wcurv::cmd_verify_geometry(opt, std::cout, std::cerr);
  if (*self) return wcurv::cmd_selftest(opt, std::cout, std::cerr);
  if (*sweep) return wcurv::cmd_sweep(opt, std::cout, std::cerr);
  return wcurv::exit_code::error;
}
