#ifndef BOUNDARY_INTERCEPT_TRANSFORM_HPP
#define BOUNDARY_INTERCEPT_TRANSFORM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "normal.hpp"

namespace boundary_intercept {

namespace detail {

inline void require_finite(std::span<const double> w, const char *what) {
  for (double v : w)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " contains a non-finite value");
}

} // namespace detail

/// Leave-one-out empirical CDF of the index evaluated at each sample point:
/// out[i] = #{j != i : w[j] <= w[i]} / (n - 1). Ties count with "<=".
inline std::vector<double> loo_ecdf(std::span<const double> w) {
  const std::size_t n = w.size();
  if (n < 2) throw std::invalid_argument("loo_ecdf needs at least two points");
  detail::require_finite(w, "index vector");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });

  std::vector<double> out(n);
  const double denom = static_cast<double>(n - 1);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && w[order[end]] == w[order[start]]) ++end;
    // every member of the tie group sees all of [0, end) except itself
    const double value = static_cast<double>(end - 1) / denom;
    for (std::size_t k = start; k < end; ++k) out[order[k]] = value;
    start = end;
  }
  return out;
}

enum class TransformKind { EmpiricalLeaveOneOut, StandardLaplacian, StandardNormal, UserMonotone };

/// A strictly increasing CDF used to map the index into (0, 1).
struct TransformSpec {
  TransformKind kind = TransformKind::EmpiricalLeaveOneOut;
  std::function<double(double)> cdf; // only for UserMonotone

  static TransformSpec laplacian() { return {TransformKind::StandardLaplacian, {}}; }
  static TransformSpec normal() { return {TransformKind::StandardNormal, {}}; }
  static TransformSpec user(std::function<double(double)> f) {
    return {TransformKind::UserMonotone, std::move(f)};
  }
};

inline double laplace_cdf(double w) {
  return w < 0.0 ? 0.5 * std::exp(w) : 1.0 - 0.5 * std::exp(-w);
}

inline std::vector<double> apply_cdf(const TransformSpec &spec, std::span<const double> w) {
  detail::require_finite(w, "index vector");
  std::vector<double> out(w.size());
  switch (spec.kind) {
  case TransformKind::EmpiricalLeaveOneOut:
    throw std::invalid_argument("apply_cdf: use loo_ecdf for the empirical transform");
  case TransformKind::StandardLaplacian:
    std::transform(w.begin(), w.end(), out.begin(), laplace_cdf);
    break;
  case TransformKind::StandardNormal:
    std::transform(w.begin(), w.end(), out.begin(), normal_cdf);
    break;
  case TransformKind::UserMonotone:
    if (!spec.cdf) throw std::invalid_argument("apply_cdf: user transform has no callable");
    std::transform(w.begin(), w.end(), out.begin(), spec.cdf);
    break;
  }
  return out;
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_TRANSFORM_HPP
