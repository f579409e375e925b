#ifndef BOUNDARY_INTERCEPT_MONTECARLO_HPP
#define BOUNDARY_INTERCEPT_MONTECARLO_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <locale>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bandwidth.hpp"
#include "dgp.hpp"
#include "estimators.hpp"
#include "firststage.hpp"
#include "inference.hpp"

namespace boundary_intercept {

/// One line of the estimator roster.
struct EstimatorConfig {
  std::string label;
  Method method = Method::TwoStep;
  double quantile = 0.0; // Heckman / AS threshold quantile
  double b = 1.0;        // AS smoother width
  KernelId kernel = KernelId::Epanechnikov;
};

inline constexpr std::array<double, 6> default_quantiles{0.99, 0.95, 0.9, 0.8, 0.7, 0.5};

inline std::string quantile_label(std::string_view prefix, double q) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << prefix << "_q" << q;
  return os.str();
}

/// Two-step; Heckman and AS at each quantile; local constant and local linear
/// under each of the four kernels.
inline std::vector<EstimatorConfig> default_roster() {
  std::vector<EstimatorConfig> roster;
  roster.push_back({"twostep", Method::TwoStep});
  for (double q : default_quantiles)
    roster.push_back({quantile_label("heckman", q), Method::Heckman90, q});
  for (double q : default_quantiles)
    roster.push_back({quantile_label("as", q), Method::AS98, q, 1.0});
  for (KernelId k : all_kernels)
    roster.push_back({"lc_" + std::string(to_string(k)), Method::LocalConstant, 0.0, 1.0, k});
  for (KernelId k : all_kernels)
    roster.push_back({"ll_" + std::string(to_string(k)), Method::LocalLinear, 0.0, 1.0, k});
  return roster;
}

inline void check_roster(const std::vector<EstimatorConfig> &roster) {
  for (std::size_t i = 0; i < roster.size(); ++i) {
    const auto &e = roster[i];
    if (e.method != Method::Heckman90 && e.method != Method::AS98) continue;
    if (!(e.quantile > 0.0 && e.quantile < 1.0))
      throw std::invalid_argument("roster: quantile of '" + e.label + "' must lie in (0, 1)");
    if (i > 0 && roster[i - 1].method == e.method && !(e.quantile < roster[i - 1].quantile))
      throw std::invalid_argument("roster: quantiles must be descending within an estimator");
  }
}

/// Order statistic of rank ceil(q m) (1-based) among the m selected index values.
inline double gamma_quantile(std::vector<double> w_selected, double q) {
  if (w_selected.empty()) throw std::invalid_argument("gamma_quantile: empty selected subsample");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("gamma_quantile: q must lie in (0, 1)");
  const std::size_t m = w_selected.size();
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(m)));
  const std::size_t k = std::clamp<std::size_t>(rank, 1, m) - 1;
  std::nth_element(w_selected.begin(), w_selected.begin() + static_cast<std::ptrdiff_t>(k),
                   w_selected.end());
  return w_selected[k];
}

struct EntryResult {
  std::string label;
  std::optional<InterceptEstimate> estimate;
  std::optional<TestResult> test;
  std::string error; // non-empty on failure
};

struct ReplicationResult {
  std::uint32_t replication = 0;
  std::vector<EntryResult> entries;
  std::string failure; // dataset-level failure; entries empty
};

struct RunOptions {
  double ade_bandwidth_multiplier = 1.0;
  PilotOptions pilots;
};

namespace detail {

struct SemiparametricContext {
  Dataset const *data;
  Eigen::VectorXd theta;
  Eigen::VectorXd w_hat;
  std::vector<double> w_selected;
  BoundarySample sample;
  std::map<KernelId, BandwidthReport> bandwidths;
  PilotOptions pilots;
};

inline EntryResult run_entry(const EstimatorConfig &cfg, SemiparametricContext &ctx) {
  EntryResult out{cfg.label, std::nullopt, std::nullopt, {}};
  const Dataset &data = *ctx.data;
  InterceptEstimate est;
  switch (cfg.method) {
  case Method::Heckman90: {
    const double gamma = gamma_quantile(ctx.w_selected, cfg.quantile);
    est = heckman_estimator(data, ctx.theta, ctx.w_hat, gamma);
    est.se = se_tail_mean_indicator(data, ctx.theta, ctx.w_hat, est.mu, gamma);
    break;
  }
  case Method::AS98: {
    const double gamma = gamma_quantile(ctx.w_selected, cfg.quantile);
    est = as_estimator(data, ctx.theta, ctx.w_hat, gamma, cfg.b);
    est.se = se_tail_mean_smoothed(data, ctx.theta, ctx.w_hat, est.mu, gamma, cfg.b);
    break;
  }
  case Method::LocalConstant:
  case Method::LocalLinear: {
    auto it = ctx.bandwidths.find(cfg.kernel);
    if (it == ctx.bandwidths.end())
      it = ctx.bandwidths.emplace(cfg.kernel, select_bandwidths(ctx.sample, cfg.kernel, ctx.pilots)).first;
    const BandwidthReport &bw = it->second;
    const long n = static_cast<long>(data.size());
    if (cfg.method == Method::LocalConstant) {
      est = local_constant(ctx.sample, cfg.kernel, bw.h_lc);
      est.se = se_local_constant(bw.sigma2, cfg.kernel, n, bw.h_lc);
    } else {
      est = local_linear(ctx.sample, cfg.kernel, bw.h_ll);
      est.se = se_local_linear(bw.sigma2, cfg.kernel, n, bw.h_ll);
    }
    break;
  }
  default:
    throw std::invalid_argument("roster entry '" + cfg.label + "' has an unsupported method");
  }
  out.test = t_test(est.mu, est.se, 0.0);
  out.estimate = est;
  return out;
}

} // namespace detail

/// Generates one dataset and evaluates every roster entry on it. Failures of
/// individual estimators are recorded per entry; the ADE first stage is fitted
/// once and shared by every semiparametric entry.
inline ReplicationResult run_replication(const SimulationDesign &design, std::uint32_t rep,
                                         const std::vector<EstimatorConfig> &roster,
                                         const RunOptions &opt = {}) {
  ReplicationResult result;
  result.replication = rep;
  const Dataset data = generate(design, rep);
  const auto selected = data.selected_count();
  if (selected == 0 || selected == data.size()) {
    result.failure = selected == 0 ? "all observations censored" : "no censored observations";
    return result;
  }

  detail::SemiparametricContext ctx{&data, zero_theta(data), {}, {}, {}, {}, opt.pilots};
  std::string first_stage_error;
  bool needs_semiparametric = std::any_of(roster.begin(), roster.end(), [](const auto &e) {
    return e.method != Method::TwoStep;
  });
  if (needs_semiparametric) {
    try {
      const double h = default_ade_bandwidth(data.x, opt.ade_bandwidth_multiplier);
      const Eigen::VectorXd beta = average_derivative_beta(data.d, data.x, h);
      ctx.w_hat = data.x * beta;
      for (Eigen::Index i = 0; i < data.size(); ++i)
        if (data.d[i] == 1) ctx.w_selected.push_back(ctx.w_hat[i]);
      ctx.sample = rank_boundary_sample(data, ctx.theta, ctx.w_hat);
    } catch (const std::exception &e) {
      first_stage_error = std::string("first stage: ") + e.what();
    }
  }

  for (const auto &cfg : roster) {
    if (cfg.method == Method::TwoStep) {
      EntryResult entry{cfg.label, std::nullopt, std::nullopt, {}};
      try {
        const TwoStepFit fit = heckman_two_step(data);
        InterceptEstimate est;
        est.mu = fit.mu;
        est.se = fit.se_mu;
        est.method = Method::TwoStep;
        est.effective_n = static_cast<long>(selected);
        entry.test = t_test(est.mu, est.se, 0.0);
        entry.estimate = est;
      } catch (const std::exception &e) {
        entry.error = e.what();
      }
      result.entries.push_back(std::move(entry));
      continue;
    }
    if (!first_stage_error.empty()) {
      result.entries.push_back({cfg.label, std::nullopt, std::nullopt, first_stage_error});
      continue;
    }
    try {
      result.entries.push_back(detail::run_entry(cfg, ctx));
    } catch (const std::exception &e) {
      result.entries.push_back({cfg.label, std::nullopt, std::nullopt, e.what()});
    }
  }
  return result;
}

/// Runs replications 0..reps-1 on `workers` threads. The returned vector is
/// indexed by replication, so the output never depends on scheduling.
inline std::vector<ReplicationResult> run_simulation(const SimulationDesign &design, long reps,
                                                     const std::vector<EstimatorConfig> &roster,
                                                     unsigned workers = 1,
                                                     const RunOptions &opt = {}) {
  if (reps < 2) throw std::invalid_argument("simulation needs at least two replications");
  check_design(design);
  check_roster(roster);
  // resolve c0 once, before threads start
  SimulationDesign resolved = design;
  resolved.c0 = design.resolved_c0();

  std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long r = next++; r < reps; r = next++)
      results[static_cast<std::size_t>(r)] =
          run_replication(resolved, static_cast<std::uint32_t>(r), roster, opt);
  };
  workers = std::max(1u, workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

struct SummaryRow {
  std::string label;
  long successes = 0;
  long failure_count = 0;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double rmse_ratio = 0.0;
  double rejection_rate = 0.0;
  double mc_se_bias = 0.0;

  bool valid() const { return successes >= 2; }
};

/// Bias, SD, RMSE ratio against `baseline_label`, and rejection rate over the
/// successful replications of each roster entry. Rows follow roster order.
inline std::vector<SummaryRow> summarize(const std::vector<ReplicationResult> &results,
                                         const std::vector<EstimatorConfig> &roster, double mu0,
                                         const std::string &baseline_label = "twostep") {
  if (results.size() < 2) throw std::invalid_argument("summarize needs at least two replications");
  std::vector<SummaryRow> rows;
  for (const auto &cfg : roster) {
    SummaryRow row;
    row.label = cfg.label;
    std::vector<double> values;
    long rejections = 0;
    for (const auto &rep : results) {
      if (!rep.failure.empty()) {
        ++row.failure_count;
        continue;
      }
      const auto it = std::find_if(rep.entries.begin(), rep.entries.end(),
                                   [&](const EntryResult &e) { return e.label == cfg.label; });
      if (it == rep.entries.end() || !it->estimate) {
        ++row.failure_count;
        continue;
      }
      values.push_back(it->estimate->mu);
      if (it->test && it->test->reject_5pct) ++rejections;
    }
    row.successes = static_cast<long>(values.size());
    if (row.valid()) {
      const double m = static_cast<double>(values.size());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= m;
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      row.bias = mean - mu0;
      row.sd = std::sqrt(ss / (m - 1.0));
      row.rmse = std::sqrt(row.bias * row.bias + row.sd * row.sd);
      row.rejection_rate = static_cast<double>(rejections) / m;
      row.mc_se_bias = row.sd / std::sqrt(m);
    }
    rows.push_back(row);
  }
  const auto base = std::find_if(rows.begin(), rows.end(),
                                 [&](const SummaryRow &r) { return r.label == baseline_label; });
  if (base == rows.end() || !base->valid() || !(base->rmse > 0.0))
    throw std::invalid_argument("summarize: baseline '" + baseline_label + "' missing or degenerate");
  const double base_rmse = base->rmse;
  for (auto &r : rows)
    if (r.valid()) r.rmse_ratio = r.label == baseline_label ? 1.0 : r.rmse / base_rmse;
  return rows;
}

inline const SummaryRow &find_row(const std::vector<SummaryRow> &rows, const std::string &label) {
  for (const auto &r : rows)
    if (r.label == label) return r;
  throw std::out_of_range("no summary row '" + label + "'");
}

/// CSV with fixed six-decimal formatting; statistics are left empty for rows
/// with fewer than two successful replications.
inline void write_summary_csv(std::ostream &os, const std::vector<SummaryRow> &rows) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::fixed << std::setprecision(6);
  out << "estimator,bias,sd,rmse_ratio,rejection_rate,failures,mc_se_bias\n";
  for (const auto &r : rows) {
    out << r.label << ',';
    if (r.valid())
      out << r.bias << ',' << r.sd << ',' << r.rmse_ratio << ',' << r.rejection_rate << ',';
    else
      out << ",,,,";
    out << r.failure_count << ',';
    if (r.valid()) out << r.mc_se_bias;
    out << '\n';
  }
  os << out.str();
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_MONTECARLO_HPP
