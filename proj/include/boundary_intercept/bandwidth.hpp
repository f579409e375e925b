#ifndef BOUNDARY_INTERCEPT_BANDWIDTH_HPP
#define BOUNDARY_INTERCEPT_BANDWIDTH_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "estimators.hpp"
#include "kernels.hpp"

namespace boundary_intercept {

/// Pilot quantities and the resulting plug-in bandwidths.
struct BandwidthReport {
  double h1 = 0.0;
  double h2 = 0.0;
  double sigma2 = 0.0;
  double g1 = 0.0;
  double g1prime = 0.0;
  double var_g1 = 0.0;
  double var_g1prime = 0.0;
  double h_lc = 0.0;
  double h_ll = 0.0;
  double mu_q = 0.0;
};

inline void to_json(nlohmann::json &j, const BandwidthReport &r) {
  j = nlohmann::json{{"h1", r.h1},         {"h2", r.h2},     {"sigma2", r.sigma2},
                     {"g1", r.g1},         {"g1prime", r.g1prime},
                     {"var_g1", r.var_g1}, {"var_g1prime", r.var_g1prime},
                     {"h_lc", r.h_lc},     {"h_ll", r.h_ll}};
}

inline constexpr double max_bandwidth = 0.5;

/// Multipliers on the pilot rates; both 1 unless running a sensitivity study.
struct PilotOptions {
  double h1_multiplier = 1.0;
  double h2_multiplier = 1.0;
};

inline std::pair<double, double> pilot_bandwidths(long n, const PilotOptions &opt = {}) {
  if (n < 4) throw std::invalid_argument("pilot bandwidths need n >= 4");
  const double nd = static_cast<double>(n);
  const double h1 = std::min(opt.h1_multiplier * std::pow(nd, -1.0 / 7.0), max_bandwidth);
  const double h2 = std::min(opt.h2_multiplier * std::cbrt(1.0 / nd), max_bandwidth);
  return {h1, h2};
}

/// Plug-in variance estimates of the local quadratic g(1) and g'(1).
inline std::pair<double, double> regularized_variances(double sigma2, KernelId kernel, long n,
                                                       double h1) {
  const double nh = static_cast<double>(n) * h1;
  if (!(nh > 0.0)) throw std::invalid_argument("regularized_variances: n*h1 must be > 0");
  if (sigma2 < 0.0) throw std::invalid_argument("regularized_variances: sigma2 < 0");
  const auto &kc = kernel_constants(kernel);
  return {sigma2 * kc.omegaQ22 / (nh * h1 * h1), sigma2 * kc.omegaQ33 / (nh * h1 * h1 * h1 * h1)};
}

/// c_k (sigma2 / (g1^2 + 3 var_g1))^(1/3) n^(-1/3), clamped to (0, 1/2].
inline double plug_in_h_local_constant(KernelId kernel, double sigma2, double g1, double var_g1,
                                       long n) {
  const double denom = g1 * g1 + 3.0 * var_g1;
  if (!(denom > 0.0)) throw estimation_error("bandwidth: regularized denominator is zero");
  const double h = ck_constant(kernel) * std::cbrt(sigma2 / denom) *
                   std::cbrt(1.0 / static_cast<double>(n));
  if (!(h > 0.0)) throw estimation_error("bandwidth: plug-in value is not positive (sigma2 = 0?)");
  return std::min(h, max_bandwidth);
}

/// c_k^L (sigma2 / (g1'^2 + 3 var_g1'))^(1/5) n^(-1/5), clamped to (0, 1/2].
inline double plug_in_h_local_linear(KernelId kernel, double sigma2, double g1prime,
                                     double var_g1prime, long n) {
  const double denom = g1prime * g1prime + 3.0 * var_g1prime;
  if (!(denom > 0.0)) throw estimation_error("bandwidth: regularized denominator is zero");
  const double h = ckL_constant(kernel) * std::pow(sigma2 / denom, 0.2) *
                   std::pow(static_cast<double>(n), -0.2);
  if (!(h > 0.0)) throw estimation_error("bandwidth: plug-in value is not positive (sigma2 = 0?)");
  return std::min(h, max_bandwidth);
}

/// Runs both pilots and fills every field, including h_lc and h_ll.
inline BandwidthReport select_bandwidths(const BoundarySample &s, KernelId kernel,
                                         const PilotOptions &opt = {}) {
  BandwidthReport r;
  const long n = static_cast<long>(s.n_total);
  std::tie(r.h1, r.h2) = pilot_bandwidths(n, opt);

  InterceptEstimate pilot;
  try {
    pilot = local_quadratic(s, kernel, r.h1);
  } catch (const estimation_error &e) {
    throw estimation_error(std::string("bandwidth pilot (local quadratic at h1): ") + e.what());
  }
  r.mu_q = pilot.mu;
  r.g1 = *pilot.g1;
  r.g1prime = *pilot.g1prime;
  try {
    r.sigma2 = sigma_u_sq(s, r.mu_q, kernel, r.h2);
  } catch (const estimation_error &e) {
    throw estimation_error(std::string("bandwidth pilot (sigma_u_sq at h2): ") + e.what());
  }
  std::tie(r.var_g1, r.var_g1prime) = regularized_variances(r.sigma2, kernel, n, r.h1);
  r.h_lc = plug_in_h_local_constant(kernel, r.sigma2, r.g1, r.var_g1, n);
  r.h_ll = plug_in_h_local_linear(kernel, r.sigma2, r.g1prime, r.var_g1prime, n);
  return r;
}

inline BandwidthReport select_h_local_constant(const Dataset &data, const Eigen::VectorXd &theta,
                                               const Eigen::VectorXd &w_hat, KernelId kernel,
                                               const PilotOptions &opt = {}) {
  return select_bandwidths(rank_boundary_sample(data, theta, w_hat), kernel, opt);
}

inline BandwidthReport select_h_local_linear(const Dataset &data, const Eigen::VectorXd &theta,
                                             const Eigen::VectorXd &w_hat, KernelId kernel,
                                             const PilotOptions &opt = {}) {
  return select_bandwidths(rank_boundary_sample(data, theta, w_hat), kernel, opt);
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_BANDWIDTH_HPP
