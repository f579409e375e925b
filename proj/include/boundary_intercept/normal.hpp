#ifndef BOUNDARY_INTERCEPT_NORMAL_HPP
#define BOUNDARY_INTERCEPT_NORMAL_HPP

#include <cmath>
#include <numbers>

namespace boundary_intercept {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// phi(v) / Phi(v). Below -37 Phi underflows, so the asymptotic expansion
/// -v + 1/(-v) takes over.
inline double inverse_mills(double v) {
  if (v < -37.0) return -v + 1.0 / (-v);
  return normal_pdf(v) / normal_cdf(v);
}

/// Two-sided 5% critical value of the standard normal.
inline constexpr double z_crit_5pct = 1.959964;

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_NORMAL_HPP
