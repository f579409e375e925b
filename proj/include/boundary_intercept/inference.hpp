#ifndef BOUNDARY_INTERCEPT_INFERENCE_HPP
#define BOUNDARY_INTERCEPT_INFERENCE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "normal.hpp"

namespace boundary_intercept {

struct TestResult {
  double t_stat = 0.0;
  double se = 0.0;
  bool reject_5pct = false;
  double null_value = 0.0;
};

namespace detail {

inline double nh_product(long n, double h) {
  const double nh = static_cast<double>(n) * h;
  if (!(nh > 0.0)) throw std::invalid_argument("standard error: n*h must be > 0");
  return nh;
}

} // namespace detail

/// sqrt(chi0 sigma2 / (kappa0^2 n h))
inline double se_local_constant(double sigma2, KernelId kernel, long n, double h) {
  const double nh = detail::nh_product(n, h);
  if (sigma2 < 0.0) throw std::invalid_argument("standard error: sigma2 < 0");
  const auto &kc = kernel_constants(kernel);
  return std::sqrt(kc.chi[0] * sigma2 / (kc.kappa[0] * kc.kappa[0] * nh));
}

/// sqrt(sigma2 OmegaL[0][0] / (n h))
inline double se_local_linear(double sigma2, KernelId kernel, long n, double h) {
  const double nh = detail::nh_product(n, h);
  if (sigma2 < 0.0) throw std::invalid_argument("standard error: sigma2 < 0");
  return std::sqrt(sigma2 * omegaL_matrix(kernel)[0][0] / nh);
}

/// Standard error of a weighted mean of selected residuals with weights
/// s_i = weight(w_hat_i): sqrt(v * sum s^2 / (sum s)^2), v the weighted
/// residual variance around mu.
inline double se_tail_mean(const Dataset &data, const Eigen::VectorXd &theta,
                           const Eigen::VectorXd &w_hat, double mu,
                           const std::function<double(double)> &weight) {
  check_theta(data, theta);
  double sw = 0.0, sw2 = 0.0, swe2 = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.d[i] != 1) continue;
    const double s = weight(w_hat[i]);
    if (!(s > 0.0)) continue;
    const double e = outcome_residual(data, theta, i) - mu;
    sw += s;
    sw2 += s * s;
    swe2 += s * e * e;
    ++count;
  }
  if (count < 2) throw estimation_error("se_tail_mean: fewer than two weighted observations");
  return std::sqrt((swe2 / sw) * sw2 / (sw * sw));
}

/// Indicator weights 1{w > gamma} (Heckman) ...
inline double se_tail_mean_indicator(const Dataset &data, const Eigen::VectorXd &theta,
                                     const Eigen::VectorXd &w_hat, double mu, double gamma) {
  return se_tail_mean(data, theta, w_hat, mu, [gamma](double w) { return w > gamma ? 1.0 : 0.0; });
}

/// ... or smoothed weights s(w - gamma; b) (Andrews-Schafgans).
inline double se_tail_mean_smoothed(const Dataset &data, const Eigen::VectorXd &theta,
                                    const Eigen::VectorXd &w_hat, double mu, double gamma,
                                    double b) {
  return se_tail_mean(data, theta, w_hat, mu,
                      [gamma, b](double w) { return as_smoother(w - gamma, b); });
}

/// Two-sided 5% z test of mu = null_value. No bias correction.
inline TestResult t_test(double mu, double se, double null_value = 0.0) {
  if (!(se > 0.0)) throw std::invalid_argument("t_test: standard error must be > 0");
  TestResult r;
  r.t_stat = (mu - null_value) / se;
  r.se = se;
  r.null_value = null_value;
  r.reject_5pct = std::abs(r.t_stat) > z_crit_5pct;
  return r;
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_INFERENCE_HPP
