#ifndef BOUNDARY_INTERCEPT_ESTIMATORS_HPP
#define BOUNDARY_INTERCEPT_ESTIMATORS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "error.hpp"
#include "kernels.hpp"
#include "transform.hpp"

namespace boundary_intercept {

enum class Method { Heckman90, AS98, LocalConstant, LocalLinear, LocalQuadratic, TwoStep };

inline std::string_view to_string(Method m) {
  switch (m) {
  case Method::Heckman90: return "heckman";
  case Method::AS98: return "as";
  case Method::LocalConstant: return "lc";
  case Method::LocalLinear: return "ll";
  case Method::LocalQuadratic: return "lq";
  case Method::TwoStep: return "twostep";
  }
  return "unknown";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::Heckman90, Method::AS98, Method::LocalConstant, Method::LocalLinear,
                   Method::LocalQuadratic, Method::TwoStep})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown method '" + std::string(s) +
                              "' (expected lc|ll|heckman|as|twostep)");
}

/// Point estimate of the intercept plus diagnostics. For Heckman/AS the
/// bandwidth field holds the threshold gamma.
struct InterceptEstimate {
  double mu = 0.0;
  double se = 0.0;
  double bandwidth = 0.0;
  Method method = Method::LocalConstant;
  long effective_n = 0;
  std::optional<double> g1;
  std::optional<double> g1prime;
};

/// Selected observations only: outcome residual and transformed index,
/// sorted by (t, resid) so that every weighted sum is order-independent.
struct BoundarySample {
  std::vector<double> resid;
  std::vector<double> t;
  Eigen::Index n_total = 0;

  std::size_t size() const { return t.size(); }
};

namespace detail {

inline BoundarySample sorted_sample(std::vector<std::pair<double, double>> pairs,
                                    Eigen::Index n_total) {
  std::sort(pairs.begin(), pairs.end());
  BoundarySample s;
  s.n_total = n_total;
  s.t.reserve(pairs.size());
  s.resid.reserve(pairs.size());
  for (const auto &[t, r] : pairs) {
    s.t.push_back(t);
    s.resid.push_back(r);
  }
  return s;
}

inline void check_bandwidth(double h) {
  if (!(h > 0.0) || h > 0.5)
    throw std::invalid_argument("bandwidth must lie in (0, 1/2], got " + std::to_string(h));
}

inline std::string describe_h(double h) {
  std::ostringstream os;
  os << h;
  return os.str();
}

} // namespace detail

/// Pairs each selected row's residual y - z'theta with its transformed index.
/// t must hold one value per row of the dataset.
inline BoundarySample make_boundary_sample(const Dataset &data, const Eigen::VectorXd &theta,
                                           std::span<const double> t) {
  check_theta(data, theta);
  if (static_cast<Eigen::Index>(t.size()) != data.size())
    throw std::invalid_argument("transformed index length does not match the dataset");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(static_cast<std::size_t>(data.selected_count()));
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (data.d[i] == 1) pairs.emplace_back(t[static_cast<std::size_t>(i)], outcome_residual(data, theta, i));
  return detail::sorted_sample(std::move(pairs), data.size());
}

/// Boundary sample with t = leave-one-out empirical CDF of w_hat.
inline BoundarySample rank_boundary_sample(const Dataset &data, const Eigen::VectorXd &theta,
                                           const Eigen::VectorXd &w_hat) {
  if (w_hat.size() != data.size())
    throw std::invalid_argument("index vector length does not match the dataset");
  const auto t = loo_ecdf(std::span<const double>(w_hat.data(), static_cast<std::size_t>(w_hat.size())));
  return make_boundary_sample(data, theta, t);
}

template <class F>
concept KernelFunction = std::invocable<const F &, double> &&
                         std::convertible_to<std::invoke_result_t<const F &, double>, double>;

/// Adapts a KernelId to the callable form used by the generic estimators.
struct KernelRef {
  KernelId id;
  double operator()(double u) const { return eval_kernel(id, u); }
};

// ---------------------------------------------------------------------------
// Weighted tail means (Heckman, Andrews-Schafgans)

namespace detail {

inline std::vector<std::pair<double, double>> selected_index_resid(const Dataset &data,
                                                                   const Eigen::VectorXd &theta,
                                                                   const Eigen::VectorXd &w_hat) {
  check_theta(data, theta);
  if (w_hat.size() != data.size())
    throw std::invalid_argument("index vector length does not match the dataset");
  std::vector<std::pair<double, double>> out;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    if (data.d[i] == 1) out.emplace_back(w_hat[i], outcome_residual(data, theta, i));
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace detail

/// Average of selected residuals whose index exceeds gamma.
inline InterceptEstimate heckman_estimator(const Dataset &data, const Eigen::VectorXd &theta,
                                           const Eigen::VectorXd &w_hat, double gamma) {
  const auto pairs = detail::selected_index_resid(data, theta, w_hat);
  double sum = 0.0;
  long count = 0;
  for (const auto &[w, r] : pairs) {
    if (w > gamma) {
      sum += r;
      ++count;
    }
  }
  if (count == 0)
    throw empty_window_error("heckman: no selected observation with index above gamma = " +
                             detail::describe_h(gamma));
  InterceptEstimate est;
  est.mu = sum / static_cast<double>(count);
  est.bandwidth = gamma;
  est.method = Method::Heckman90;
  est.effective_n = count;
  return est;
}

/// Residual mean weighted by the smoothed tail weight s(w - gamma; b).
inline InterceptEstimate as_estimator(const Dataset &data, const Eigen::VectorXd &theta,
                                      const Eigen::VectorXd &w_hat, double gamma, double b) {
  const auto pairs = detail::selected_index_resid(data, theta, w_hat);
  double num = 0.0, den = 0.0;
  long count = 0;
  for (const auto &[w, r] : pairs) {
    const double s = as_smoother(w - gamma, b);
    if (s > 0.0) {
      num += s * r;
      den += s;
      ++count;
    }
  }
  if (!(den > 0.0))
    throw empty_window_error("as: all smoothed weights are zero at gamma = " +
                             detail::describe_h(gamma));
  InterceptEstimate est;
  est.mu = num / den;
  est.bandwidth = gamma;
  est.method = Method::AS98;
  est.effective_n = count;
  return est;
}

// ---------------------------------------------------------------------------
// Local constant

template <KernelFunction K>
InterceptEstimate local_constant_fit(const BoundarySample &s, const K &kernel, double h) {
  detail::check_bandwidth(h);
  double num = 0.0, den = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = kernel((1.0 - s.t[i]) / h);
    if (w > 0.0) {
      num += w * s.resid[i];
      den += w;
      ++count;
    }
  }
  if (!(den > 0.0))
    throw empty_window_error("empty window: no selected observation has positive weight at h = " +
                             detail::describe_h(h));
  InterceptEstimate est;
  est.mu = num / den;
  est.bandwidth = h;
  est.method = Method::LocalConstant;
  est.effective_n = count;
  return est;
}

/// Kernel-weighted residual mean near t = 1 for an arbitrary transform t in (0, 1].
template <KernelFunction K>
InterceptEstimate local_constant_generic(const Dataset &data, const Eigen::VectorXd &theta,
                                         std::span<const double> t, const K &kernel, double h) {
  return local_constant_fit(make_boundary_sample(data, theta, t), kernel, h);
}

inline InterceptEstimate local_constant_generic(const Dataset &data, const Eigen::VectorXd &theta,
                                                std::span<const double> t, KernelId kernel,
                                                double h) {
  return local_constant_generic(data, theta, t, KernelRef{kernel}, h);
}

inline InterceptEstimate local_constant(const BoundarySample &s, KernelId kernel, double h) {
  return local_constant_fit(s, KernelRef{kernel}, h);
}

/// Local constant estimator on the leave-one-out empirical CDF of w_hat.
inline InterceptEstimate local_constant(const Dataset &data, const Eigen::VectorXd &theta,
                                        const Eigen::VectorXd &w_hat, KernelId kernel, double h) {
  return local_constant(rank_boundary_sample(data, theta, w_hat), kernel, h);
}

// ---------------------------------------------------------------------------
// Local polynomial (degree 1 and 2) at the boundary

/// Normal equations of a degree-p boundary fit, regressors (t - 1)^r / r!.
template <int Degree>
struct LocalFitInternals {
  static constexpr int size = Degree + 1;
  using Mat = Eigen::Matrix<double, size, size>;
  using Vec = Eigen::Matrix<double, size, 1>;
  Mat normal = Mat::Zero();
  Vec rhs = Vec::Zero();
  long positive = 0;
};

inline constexpr double max_condition_number = 1e12;

template <int Degree, KernelFunction K>
LocalFitInternals<Degree> local_fit_internals(const BoundarySample &s, const K &kernel, double h) {
  LocalFitInternals<Degree> in;
  typename LocalFitInternals<Degree>::Vec x;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = kernel((1.0 - s.t[i]) / h);
    if (!(w > 0.0)) continue;
    const double a = s.t[i] - 1.0;
    double power = 1.0, fact = 1.0;
    for (int r = 0; r <= Degree; ++r) {
      if (r > 0) {
        power *= a;
        fact *= r;
      }
      x[r] = power / fact;
    }
    in.normal.noalias() += w * x * x.transpose();
    in.rhs.noalias() += (w * s.resid[i]) * x;
    ++in.positive;
  }
  return in;
}

/// Solves the normal equations after a Jacobi-scaled condition check.
template <int Degree>
typename LocalFitInternals<Degree>::Vec solve_local_fit(const LocalFitInternals<Degree> &in,
                                                        double h) {
  using Fit = LocalFitInternals<Degree>;
  if (in.positive < Degree + 2)
    throw rank_deficiency_error("local polynomial of degree " + std::to_string(Degree) + " needs " +
                                std::to_string(Degree + 2) +
                                " positively weighted observations, found " +
                                std::to_string(in.positive) + " at h = " + detail::describe_h(h));
  const typename Fit::Vec diag = in.normal.diagonal();
  if ((diag.array() <= 0.0).any())
    throw rank_deficiency_error("local polynomial: degenerate abscissae at h = " + detail::describe_h(h));
  const typename Fit::Vec scale = diag.cwiseSqrt().cwiseInverse();
  const typename Fit::Mat scaled = scale.asDiagonal() * in.normal * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<typename Fit::Mat> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > max_condition_number)
    throw rank_deficiency_error("local polynomial: rank-deficient normal equations at h = " +
                                detail::describe_h(h));
  return in.normal.inverse() * in.rhs;
}

/// Weighted least squares of the residual on (t - 1)^r / r!, r = 0..Degree.
template <int Degree, KernelFunction K>
typename LocalFitInternals<Degree>::Vec local_polynomial_coefficients(const BoundarySample &s,
                                                                      const K &kernel, double h,
                                                                      long *positive = nullptr) {
  detail::check_bandwidth(h);
  const auto in = local_fit_internals<Degree>(s, kernel, h);
  if (positive) *positive = in.positive;
  return solve_local_fit<Degree>(in, h);
}

template <KernelFunction K>
InterceptEstimate local_linear_fit(const BoundarySample &s, const K &kernel, double h) {
  long positive = 0;
  const auto c = local_polynomial_coefficients<1>(s, kernel, h, &positive);
  InterceptEstimate est;
  est.mu = c[0];
  est.g1 = c[1];
  est.bandwidth = h;
  est.method = Method::LocalLinear;
  est.effective_n = positive;
  return est;
}

inline InterceptEstimate local_linear(const BoundarySample &s, KernelId kernel, double h) {
  return local_linear_fit(s, KernelRef{kernel}, h);
}

/// Local linear estimator; g1 carries the slope estimate of g(1).
inline InterceptEstimate local_linear(const Dataset &data, const Eigen::VectorXd &theta,
                                      const Eigen::VectorXd &w_hat, KernelId kernel, double h) {
  return local_linear(rank_boundary_sample(data, theta, w_hat), kernel, h);
}

template <KernelFunction K>
InterceptEstimate local_quadratic_fit(const BoundarySample &s, const K &kernel, double h1) {
  long positive = 0;
  const auto c = local_polynomial_coefficients<2>(s, kernel, h1, &positive);
  InterceptEstimate est;
  est.mu = c[0];
  est.g1 = c[1];
  // the 1/r! scaling makes the second coefficient g'(1) itself
  est.g1prime = c[2];
  est.bandwidth = h1;
  est.method = Method::LocalQuadratic;
  est.effective_n = positive;
  return est;
}

inline InterceptEstimate local_quadratic(const BoundarySample &s, KernelId kernel, double h1) {
  return local_quadratic_fit(s, KernelRef{kernel}, h1);
}

/// Local quadratic pilot: (mu^Q, g(1), g'(1)).
inline InterceptEstimate local_quadratic(const Dataset &data, const Eigen::VectorXd &theta,
                                         const Eigen::VectorXd &w_hat, KernelId kernel, double h1) {
  return local_quadratic(rank_boundary_sample(data, theta, w_hat), kernel, h1);
}

// ---------------------------------------------------------------------------
// Disturbance variance

inline double sigma_u_sq(const BoundarySample &s, double mu_q, KernelId kernel, double h2) {
  detail::check_bandwidth(h2);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = eval_kernel(kernel, (1.0 - s.t[i]) / h2);
    if (w > 0.0) {
      const double e = s.resid[i] - mu_q;
      num += w * e * e;
      den += w;
    }
  }
  if (!(den > 0.0))
    throw empty_window_error("sigma_u_sq: empty window at h = " + detail::describe_h(h2));
  return num / den;
}

/// Kernel-weighted mean squared residual around mu_q near the boundary.
inline double sigma_u_sq(const Dataset &data, const Eigen::VectorXd &theta,
                         const Eigen::VectorXd &w_hat, double mu_q, KernelId kernel, double h2) {
  return sigma_u_sq(rank_boundary_sample(data, theta, w_hat), mu_q, kernel, h2);
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_ESTIMATORS_HPP
