#ifndef BOUNDARY_INTERCEPT_TOOLS_COMMANDS_HPP
#define BOUNDARY_INTERCEPT_TOOLS_COMMANDS_HPP

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <boundary_intercept/boundary_intercept.hpp>

namespace boundary_intercept::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_failure = 2;

inline constexpr const char *seed_env_var = "BOUNDARY_INTERCEPT_SEED";

struct EstimateArgs {
  std::string data_path;
  KernelId kernel = KernelId::Epanechnikov;
  Method method = Method::LocalLinear;
  std::optional<double> h;
  double quantile = 0.8;
  double b = 1.0;
  std::vector<double> beta;  // empty: estimate by ADE
  std::vector<double> theta; // empty: zero vector
};

struct SimulateArgs {
  std::string design_path;
  std::optional<long> replications;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string out_dir = "results";
};

/// Seed from the environment, if set, wins over the flag.
inline std::optional<std::uint64_t> seed_override(std::optional<std::uint64_t> flag) {
  if (const char *env = std::getenv(seed_env_var); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception &) {
      throw std::invalid_argument(std::string(seed_env_var) + " is not an unsigned integer");
    }
  }
  return flag;
}

inline nlohmann::json to_json(const InterceptEstimate &e) {
  nlohmann::json j{{"mu", e.mu},
                   {"se", e.se},
                   {"bandwidth", e.bandwidth},
                   {"method", std::string(to_string(e.method))},
                   {"effective_n", e.effective_n}};
  j["g1"] = e.g1 ? nlohmann::json(*e.g1) : nlohmann::json(nullptr);
  j["g1prime"] = e.g1prime ? nlohmann::json(*e.g1prime) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const TestResult &t) {
  return {{"t_stat", t.t_stat}, {"se", t.se}, {"reject_5pct", t.reject_5pct}, {"null_value", t.null_value}};
}

inline Eigen::VectorXd to_vector(const std::vector<double> &v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Runs the requested estimator on a CSV dataset and prints one JSON object.
/// Estimation failures print {"error": ...} and return exit code 2.
inline int cmd_estimate(const EstimateArgs &args, std::ostream &out) {
  nlohmann::json result;
  try {
    std::ifstream in(args.data_path);
    if (!in) throw std::runtime_error("cannot open data file '" + args.data_path + "'");
    const Dataset data = read_dataset_csv(in);
    validate(data);
    const auto selected = data.selected_count();
    if (selected == 0) throw estimation_error("all observations censored");
    const long n = static_cast<long>(data.size());

    if (args.method == Method::TwoStep) {
      const TwoStepFit fit = heckman_two_step(data);
      InterceptEstimate est;
      est.mu = fit.mu;
      est.se = fit.se_mu;
      est.method = Method::TwoStep;
      est.effective_n = static_cast<long>(selected);
      result["estimate"] = to_json(est);
      result["test"] = to_json(t_test(est.mu, est.se));
      result["first_stage"] = {{"probit", std::vector<double>(fit.probit_coef.begin(), fit.probit_coef.end())},
                               {"theta", std::vector<double>(fit.theta.begin(), fit.theta.end())}};
      result["bandwidth"] = nullptr;
      result["n"] = n;
      out << result.dump(2) << '\n';
      return exit_ok;
    }

    Eigen::VectorXd theta = args.theta.empty() ? zero_theta(data) : to_vector(args.theta);
    check_theta(data, theta);
    Eigen::VectorXd beta;
    std::optional<double> ade_h;
    if (args.beta.empty()) {
      ade_h = default_ade_bandwidth(data.x);
      beta = average_derivative_beta(data.d, data.x, *ade_h);
    } else {
      beta = to_vector(args.beta);
    }
    const FirstStageFit fs = make_first_stage(data, beta, theta);
    result["first_stage"] = {{"beta", std::vector<double>(fs.beta.begin(), fs.beta.end())},
                             {"theta", std::vector<double>(fs.theta.begin(), fs.theta.end())}};
    if (ade_h) result["first_stage"]["ade_bandwidth"] = *ade_h;

    InterceptEstimate est;
    if (args.method == Method::Heckman90 || args.method == Method::AS98) {
      std::vector<double> w_sel;
      for (Eigen::Index i = 0; i < data.size(); ++i)
        if (data.d[i] == 1) w_sel.push_back(fs.w_hat[i]);
      const double gamma = gamma_quantile(w_sel, args.quantile);
      if (args.method == Method::Heckman90) {
        est = heckman_estimator(data, fs.theta, fs.w_hat, gamma);
        est.se = se_tail_mean_indicator(data, fs.theta, fs.w_hat, est.mu, gamma);
      } else {
        est = as_estimator(data, fs.theta, fs.w_hat, gamma, args.b);
        est.se = se_tail_mean_smoothed(data, fs.theta, fs.w_hat, est.mu, gamma, args.b);
      }
      result["bandwidth"] = nullptr;
    } else if (args.method == Method::LocalConstant || args.method == Method::LocalLinear) {
      const BoundarySample sample = rank_boundary_sample(data, fs.theta, fs.w_hat);
      const BandwidthReport report = select_bandwidths(sample, args.kernel);
      result["bandwidth"] = report;
      if (args.method == Method::LocalConstant) {
        const double h = args.h.value_or(report.h_lc);
        est = local_constant(sample, args.kernel, h);
        est.se = se_local_constant(report.sigma2, args.kernel, n, h);
      } else {
        const double h = args.h.value_or(report.h_ll);
        est = local_linear(sample, args.kernel, h);
        est.se = se_local_linear(report.sigma2, args.kernel, n, h);
      }
    } else {
      throw std::invalid_argument("method not supported by estimate");
    }
    result["estimate"] = to_json(est);
    result["test"] = to_json(t_test(est.mu, est.se));
    result["n"] = n;
    out << result.dump(2) << '\n';
    return exit_ok;
  } catch (const std::exception &e) {
    out << nlohmann::json{{"error", e.what()}}.dump(2) << '\n';
    return exit_failure;
  }
}

inline std::string format_fixed(double v, int precision = 6) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

/// Kernel constants table as CSV.
inline void cmd_kernels(std::ostream &out) {
  out << "kernel,kappa0,kappa1,kappa2,kappa3,kappa4,chi0,chi1,chi2,chi3,chi4,"
         "c_k,c_kL,omegaQ22,omegaQ33,omegaL00,omegaL01,omegaL11\n";
  for (KernelId id : all_kernels) {
    const auto &kc = kernel_constants(id);
    out << to_string(id);
    for (double v : kc.kappa) out << ',' << format_fixed(v, 10);
    for (double v : kc.chi) out << ',' << format_fixed(v, 10);
    for (double v : {kc.c_k, kc.c_kL, kc.omegaQ22, kc.omegaQ33, kc.omegaL[0][0], kc.omegaL[0][1],
                     kc.omegaL[1][1]})
      out << ',' << format_fixed(v, 6);
    out << '\n';
  }
}

inline int cmd_calibrate(EpsDist dist, double target_p, std::ostream &out) {
  const double c0 = calibrate_c0(dist, target_p);
  nlohmann::json j{{"eps_dist", std::string(to_string(dist))},
                   {"target_p", target_p},
                   {"c0", c0},
                   {"draws", calibration_draws},
                   {"seed", calibration_seed}};
  out << j.dump(2) << '\n';
  return exit_ok;
}

inline std::string table_file_name(const std::string &design, long n) {
  return design + "_n" + std::to_string(n) + ".csv";
}

/// Runs every (design, n) cell of a config, writing one CSV per cell and a
/// manifest.json into the output directory.
inline int cmd_simulate(const SimulateArgs &args, std::ostream &log) {
  nlohmann::json raw;
  {
    std::ifstream in(args.design_path);
    if (!in) {
      log << "error: cannot open design file '" << args.design_path << "'\n";
      return exit_usage;
    }
    try {
      in >> raw;
    } catch (const nlohmann::json::exception &e) {
      log << "error: design file is not valid JSON: " << e.what() << '\n';
      return exit_usage;
    }
  }
  SimulationConfig cfg;
  try {
    cfg = parse_simulation_config(raw);
    if (args.replications) {
      if (*args.replications < 2) throw config_error("--reps", "must be >= 2");
      cfg.replications = *args.replications;
    }
    if (const auto seed = seed_override(args.seed)) {
      cfg.seed = *seed;
      for (auto &d : cfg.designs) d.design.base_seed = *seed;
    }
  } catch (const std::exception &e) {
    log << "error: invalid design file: " << e.what() << '\n';
    return exit_usage;
  }

  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(args.out_dir);
  nlohmann::json manifest{{"config", raw},
                          {"name", cfg.name},
                          {"replications", cfg.replications},
                          {"seed", cfg.seed},
                          {"calibration", {{"seed", calibration_seed}, {"draws", calibration_draws}}},
                          {"version", BOUNDARY_INTERCEPT_VERSION},
                          {"workers", args.workers},
                          {"tables", nlohmann::json::array()}};
  try {
    for (const auto &block : cfg.designs) {
      const double c0 = block.design.resolved_c0();
      for (long n : block.sample_sizes) {
        SimulationDesign design = block.design;
        design.n = n;
        design.c0 = c0;
        const auto results = run_simulation(design, cfg.replications, cfg.roster, args.workers, cfg.options);
        long dataset_failures = 0;
        for (const auto &r : results)
          if (!r.failure.empty()) ++dataset_failures;
        const auto rows = summarize(results, cfg.roster, design.mu0);
        const auto file = std::filesystem::path(args.out_dir) / table_file_name(block.name, n);
        std::ofstream csv(file, std::ios::binary);
        write_summary_csv(csv, rows);
        if (!csv) throw std::runtime_error("cannot write " + file.string());
        manifest["tables"].push_back({{"design", block.name},
                                      {"n", n},
                                      {"eps_dist", std::string(to_string(design.eps_dist))},
                                      {"selection_prob", design.selection_prob},
                                      {"c0", c0},
                                      {"c0_source", block.design.c0 ? "config" : "calibrated"},
                                      {"dataset_failures", dataset_failures},
                                      {"file", file.filename().string()}});
        log << "wrote " << file.string() << '\n';
      }
    }
  } catch (const std::exception &e) {
    log << "error: " << e.what() << '\n';
    return exit_failure;
  }
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(std::filesystem::path(args.out_dir) / "manifest.json", std::ios::binary)
      << manifest.dump(2) << '\n';
  return exit_ok;
}

} // namespace boundary_intercept::cli

#endif // BOUNDARY_INTERCEPT_TOOLS_COMMANDS_HPP
