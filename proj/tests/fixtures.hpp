// Random fixtures and oracle comparisons shared by the unit tests and the
// acceptance binary.
#ifndef BOUNDARY_INTERCEPT_TESTS_FIXTURES_HPP
#define BOUNDARY_INTERCEPT_TESTS_FIXTURES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <boundary_intercept/boundary_intercept.hpp>

#include "oracles.hpp"

namespace fixture {

using namespace boundary_intercept;

struct Fixture {
  Dataset data;
  Eigen::VectorXd theta;
  Eigen::VectorXd w;
};

/// Selection index w ~ N(0,1), d ~ Bernoulli(Phi(w)), one outcome regressor.
inline Fixture random_fixture(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  std::uniform_real_distribution<double> unif;
  Fixture f;
  f.data.y.resize(n);
  f.data.d.resize(n);
  f.data.x.resize(n, 1);
  f.data.z.resize(n, 1);
  f.w.resize(n);
  f.theta = Eigen::VectorXd::Constant(1, 0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = norm(gen);
    f.w[i] = w;
    f.data.x(i, 0) = w;
    f.data.z(i, 0) = norm(gen);
    f.data.d[i] = unif(gen) < normal_cdf(w) ? 1 : 0;
    f.data.y[i] = f.data.d[i] == 1 ? 1.0 + 0.5 * f.data.z(i, 0) + norm(gen) : 0.0;
  }
  return f;
}

inline std::span<const double> as_span(const std::vector<double> &v) { return {v.data(), v.size()}; }

/// |generic uniform-kernel estimate - Heckman estimate| with F = normal CDF
/// and h = 1 - F(gamma).
inline double uniform_heckman_gap(const Fixture &f, double gamma) {
  const auto t = apply_cdf(TransformSpec::normal(),
                           std::span<const double>(f.w.data(), static_cast<std::size_t>(f.w.size())));
  const double h = 1.0 - normal_cdf(gamma);
  const auto uniform = [](double u) { return u <= 1.0 ? 1.0 : 0.0; };
  const double generic = local_constant_generic(f.data, f.theta, as_span(t), uniform, h).mu;
  const double heck = heckman_estimator(f.data, f.theta, f.w, gamma).mu;
  return std::abs(generic - heck);
}

/// |generic estimate with F = Laplace CDF, k(u) = s(-log u), h = e^-gamma / 2
///  - Andrews-Schafgans estimate|.
inline double laplace_as_gap(const Fixture &f, double gamma, double b) {
  const auto t = apply_cdf(TransformSpec::laplacian(),
                           std::span<const double>(f.w.data(), static_cast<std::size_t>(f.w.size())));
  const double h = 0.5 * std::exp(-gamma);
  const auto kernel = [b](double u) { return as_smoother(-std::log(u), b); };
  const double generic = local_constant_generic(f.data, f.theta, as_span(t), kernel, h).mu;
  const double as = as_estimator(f.data, f.theta, f.w, gamma, b).mu;
  return std::abs(generic - as);
}

/// Boundary sample with t uniform on (0, 1] and a planted polynomial
/// g(t) = sum_r coef[r] (t - 1)^r / r!, plus optional noise.
inline BoundarySample planted_sample(std::size_t n, const std::array<double, 3> &coef, double noise,
                                     std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> norm;
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 1.0 - unif(gen);
    const double a = t - 1.0;
    pairs.emplace_back(t, coef[0] + coef[1] * a + coef[2] * a * a / 2.0 + noise * norm(gen));
  }
  std::sort(pairs.begin(), pairs.end());
  BoundarySample s;
  s.n_total = static_cast<Eigen::Index>(n);
  for (const auto &[t, r] : pairs) {
    s.t.push_back(t);
    s.resid.push_back(r);
  }
  return s;
}

/// Weighted least-squares objective of a degree-D boundary fit.
template <std::size_t D>
double local_objective(const BoundarySample &s, KernelId kernel, double h,
                       const std::array<double, D> &c) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = eval_kernel(kernel, (1.0 - s.t[i]) / h);
    if (w == 0.0) continue;
    const double a = s.t[i] - 1.0;
    double fit = 0.0, power = 1.0, fact = 1.0;
    for (std::size_t r = 0; r < D; ++r) {
      if (r > 0) {
        power *= a;
        fact *= static_cast<double>(r);
      }
      fit += c[r] * power / fact;
    }
    total += w * (s.resid[i] - fit) * (s.resid[i] - fit);
  }
  return total;
}

/// Brute-force minimizer of the degree-(D-1) objective by zooming grid search.
template <std::size_t D>
std::array<double, D> grid_fit(const BoundarySample &s, KernelId kernel, double h) {
  std::array<double, D> center{}, half{};
  for (std::size_t r = 0; r < D; ++r) half[r] = 20.0 * std::pow(4.0 / h, static_cast<double>(r));
  return oracle::grid_minimize<D>([&](const std::array<double, D> &c) { return local_objective<D>(s, kernel, h, c); },
                                  center, half, 160, D == 3 ? 9 : 15, 0.8);
}

/// Largest coefficient difference between the closed-form fit of degree D-1
/// and the grid-search oracle.
template <std::size_t D>
double oracle_gap(const BoundarySample &s, KernelId kernel, double h) {
  const auto oracle_c = grid_fit<D>(s, kernel, h);
  std::array<double, D> fitted{};
  if constexpr (D == 1) {
    fitted[0] = local_constant(s, kernel, h).mu;
  } else if constexpr (D == 2) {
    const auto e = local_linear(s, kernel, h);
    fitted = {e.mu, *e.g1};
  } else {
    const auto e = local_quadratic(s, kernel, h);
    fitted = {e.mu, *e.g1, *e.g1prime};
  }
  double gap = 0.0;
  for (std::size_t r = 0; r < D; ++r) gap = std::max(gap, std::abs(fitted[r] - oracle_c[r]));
  return gap;
}

} // namespace fixture

#endif // BOUNDARY_INTERCEPT_TESTS_FIXTURES_HPP
