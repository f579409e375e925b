#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace bi = boundary_intercept;

int main(int argc, char **argv) {
  CLI::App app{"Boundary kernel estimators of the sample-selection intercept"};
  app.require_subcommand(1);

  bi::cli::EstimateArgs est;
  std::string kernel = "epanechnikov", method = "ll";
  double h = 0.0;
  auto *estimate = app.add_subcommand("estimate", "Estimate the intercept on a CSV dataset");
  estimate->set_help_flag("--help", "Print this help message and exit");
  estimate->add_option("--data", est.data_path, "CSV with header y,d,x1..xp[,z1..zq]")->required();
  estimate->add_option("--kernel", kernel, "gaussian|epanechnikov|poly7|polyweight7");
  estimate->add_option("--method", method, "lc|ll|heckman|as|twostep");
  auto *h_opt = estimate->add_option("--h", h, "Fixed bandwidth in (0, 1/2] (default: plug-in)");
  estimate->add_option("--quantile", est.quantile, "Heckman/AS threshold quantile");
  estimate->add_option("--b", est.b, "AS smoother width");
  estimate->add_option("--beta", est.beta, "Selection coefficients, beta1 = 1 (default: ADE)")->delimiter(',');
  estimate->add_option("--theta", est.theta, "Outcome slopes (default: zero)")->delimiter(',');

  bi::cli::SimulateArgs sim;
  std::uint64_t seed = 0;
  long reps = 0;
  auto *simulate = app.add_subcommand("simulate", "Run a Monte Carlo design file");
  simulate->add_option("--design", sim.design_path, "JSON design file")->required();
  auto *reps_opt = simulate->add_option("--reps", reps, "Override the replication count");
  auto *seed_opt = simulate->add_option("--seed", seed, "Override the base seed");
  simulate->add_option("--workers", sim.workers, "Worker threads");
  simulate->add_option("--out", sim.out_dir, "Output directory");

  app.add_subcommand("kernels", "Print kernel functionals and derived constants");

  std::string eps = "normal";
  double target_p = 0.5;
  auto *calibrate = app.add_subcommand("calibrate", "Calibrate c0 for a target selection probability");
  calibrate->add_option("--eps", eps, "normal|t3|chisq3");
  calibrate->add_option("--target-p", target_p, "Target Pr(D = 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bi::cli::exit_usage;
  }

  try {
    if (*estimate) {
      est.kernel = bi::parse_kernel(kernel);
      est.method = bi::parse_method(method);
      if (*h_opt) est.h = h;
      return bi::cli::cmd_estimate(est, std::cout);
    }
    if (*simulate) {
      if (*reps_opt) sim.replications = reps;
      if (*seed_opt) sim.seed = seed;
      return bi::cli::cmd_simulate(sim, std::cerr);
    }
    if (app.got_subcommand("kernels")) {
      bi::cli::cmd_kernels(std::cout);
      return bi::cli::exit_ok;
    }
    if (*calibrate) return bi::cli::cmd_calibrate(bi::parse_eps_dist(eps), target_p, std::cout);
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return bi::cli::exit_usage;
  }
  return bi::cli::exit_usage;
}
