#ifndef BOUNDARY_INTERCEPT_FIRSTSTAGE_HPP
#define BOUNDARY_INTERCEPT_FIRSTSTAGE_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "error.hpp"
#include "normal.hpp"

namespace boundary_intercept {

/// First-stage output shared by every semiparametric intercept estimator.
struct FirstStageFit {
  Eigen::VectorXd beta;  // beta[0] == 1
  Eigen::VectorXd theta; // outcome slopes, caller-supplied
  Eigen::VectorXd w_hat; // x * beta
};

inline FirstStageFit make_first_stage(const Dataset &data, Eigen::VectorXd beta,
                                      Eigen::VectorXd theta) {
  if (beta.size() != data.x.cols())
    throw std::invalid_argument("beta length does not match the selection regressors");
  if (beta.size() == 0 || beta[0] != 1.0)
    throw std::invalid_argument("beta must be normalized so that beta[0] == 1");
  check_theta(data, theta);
  Eigen::VectorXd w = data.x * beta;
  return {std::move(beta), std::move(theta), std::move(w)};
}

// ---------------------------------------------------------------------------
// Probit

struct ProbitOptions {
  int max_iterations = 100;
  double gradient_tol = 1e-10;
  double step_tol = 1e-12;
  double divergence_norm = 1e6;
};

namespace detail {

// log Phi(q v) summed, plus gradient and information matrix.
struct ProbitTerms {
  double loglik = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd info;
};

inline double log_normal_cdf(double v) {
  if (v < -37.0) {
    // log(phi(v)/(-v)) up to O(v^-2)
    return -0.5 * v * v - std::log(-v) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return std::log(normal_cdf(v));
}

inline double probit_loglik(const Eigen::VectorXi &d, const Eigen::MatrixXd &X,
                            const Eigen::VectorXd &coef) {
  const Eigen::VectorXd v = X * coef;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) ll += log_normal_cdf(d[i] == 1 ? v[i] : -v[i]);
  return ll;
}

inline ProbitTerms probit_terms(const Eigen::VectorXi &d, const Eigen::MatrixXd &X,
                                const Eigen::VectorXd &coef) {
  const Eigen::Index n = X.rows(), k = X.cols();
  ProbitTerms out{0.0, Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Zero(k, k)};
  const Eigen::VectorXd v = X * coef;
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = d[i] == 1 ? 1.0 : -1.0;
    const double qv = q * v[i];
    const double lam = inverse_mills(qv);
    out.loglik += log_normal_cdf(qv);
    out.grad.noalias() += (q * lam) * X.row(i).transpose();
    weights[i] = lam * (lam + qv);
  }
  out.info.noalias() = X.transpose() * weights.asDiagonal() * X;
  return out;
}

/// A coefficient vector that classifies every observation correctly can always
/// be scaled up to raise the likelihood, so it cannot be a maximizer.
inline Eigen::VectorXd reject_separating(const Eigen::VectorXi &d, const Eigen::MatrixXd &X,
                                         Eigen::VectorXd coef) {
  const Eigen::VectorXd v = X * coef;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if ((d[i] == 1 ? v[i] : -v[i]) <= 0.0) return coef;
  throw estimation_error("probit: perfect separation (index classifies every observation)");
}

} // namespace detail

/// Probit maximum likelihood by Newton-Raphson with step halving. X must
/// already contain the constant column if one is wanted.
inline Eigen::VectorXd probit_mle(const Eigen::VectorXi &d, const Eigen::MatrixXd &X,
                                  const ProbitOptions &opt = {}) {
  if (d.size() != X.rows() || X.rows() == 0)
    throw std::invalid_argument("probit: d and X must be non-empty and of equal length");
  const auto ones = d.sum();
  if (ones == 0 || ones == d.size())
    throw estimation_error("probit: perfect separation (all outcomes identical)");

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(X.cols());
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const auto terms = detail::probit_terms(d, X, coef);
    if (terms.grad.cwiseAbs().maxCoeff() < opt.gradient_tol) return detail::reject_separating(d, X, coef);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(terms.info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff()))
      throw rank_deficiency_error("probit: singular information matrix");
    const Eigen::VectorXd step = ldlt.solve(terms.grad);
    if (step.cwiseAbs().maxCoeff() < opt.step_tol) return detail::reject_separating(d, X, coef + step);

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 50; ++halving, scale *= 0.5) {
      Eigen::VectorXd trial = coef + scale * step;
      if (detail::probit_loglik(d, X, trial) >= terms.loglik) {
        coef = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // no ascent left in floating point: we are at the optimum
      if (step.cwiseAbs().maxCoeff() < 1e-8) return detail::reject_separating(d, X, coef);
      throw estimation_error("probit: line search failed");
    }
    if ((scale * step).cwiseAbs().maxCoeff() < opt.step_tol) return detail::reject_separating(d, X, coef);
    if (coef.norm() > opt.divergence_norm)
      throw estimation_error("probit: coefficients diverge (separation detected)");
  }
  throw estimation_error("probit: no convergence within " + std::to_string(opt.max_iterations) +
                         " iterations (possible separation)");
}

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd &x) {
  Eigen::MatrixXd X(x.rows(), x.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(x.cols()) = x;
  return X;
}

// ---------------------------------------------------------------------------
// Parametric two-step

struct TwoStepOptions {
  bool include_mills = true; // false turns the second step into plain OLS
};

struct TwoStepFit {
  double mu = 0.0;
  Eigen::VectorXd theta;
  double se_mu = 0.0;
  double mills_coef = 0.0;
  Eigen::VectorXd probit_coef;
};

/// OLS with heteroskedasticity-robust (HC0) covariance.
struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;
};

inline OlsFit ols_robust(const Eigen::MatrixXd &X, const Eigen::VectorXd &y) {
  if (X.rows() < X.cols() + 1)
    throw estimation_error("OLS: fewer observations than regressors + 1");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) throw rank_deficiency_error("OLS: collinear design matrix");
  OlsFit fit;
  fit.coef = qr.solve(y);
  const Eigen::VectorXd e = y - X * fit.coef;
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  const Eigen::MatrixXd meat = X.transpose() * e.cwiseAbs2().asDiagonal() * X;
  fit.cov = bread * meat * bread;
  return fit;
}

/// Second step of the two-step estimator given the probit index of every row.
inline TwoStepFit heckman_second_step(const Dataset &data, const Eigen::VectorXd &probit_index,
                                      const TwoStepOptions &opt = {}) {
  const Eigen::Index m = data.selected_count();
  const Eigen::Index q = data.z.cols();
  const Eigen::Index k = 1 + q + (opt.include_mills ? 1 : 0);
  if (m < q + 2) throw estimation_error("two-step: too few selected observations");
  Eigen::MatrixXd X(m, k);
  Eigen::VectorXd y(m);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.d[i] != 1) continue;
    X(row, 0) = 1.0;
    if (q > 0) X.block(row, 1, 1, q) = data.z.row(i);
    if (opt.include_mills) X(row, k - 1) = inverse_mills(probit_index[i]);
    y[row] = data.y[i];
    ++row;
  }
  const OlsFit fit = ols_robust(X, y);
  TwoStepFit out;
  out.mu = fit.coef[0];
  out.theta = fit.coef.segment(1, q);
  out.se_mu = std::sqrt(fit.cov(0, 0));
  out.mills_coef = opt.include_mills ? fit.coef[k - 1] : 0.0;
  return out;
}

/// Probit on [1, x], then least squares of y on [1, z, inverse Mills ratio]
/// over the selected rows. The standard error ignores first-step noise.
inline TwoStepFit heckman_two_step(const Dataset &data, const TwoStepOptions &opt = {}) {
  validate(data);
  const Eigen::MatrixXd X = with_intercept(data.x);
  Eigen::VectorXd coef = probit_mle(data.d, X);
  TwoStepFit out = heckman_second_step(data, X * coef, opt);
  out.probit_coef = std::move(coef);
  return out;
}

// ---------------------------------------------------------------------------
// Density-weighted average derivative

/// Rule-of-thumb bandwidth: geometric mean of column SDs times n^(-1/6).
inline double default_ade_bandwidth(const Eigen::MatrixXd &x, double multiplier = 1.0) {
  const double n = static_cast<double>(x.rows());
  if (x.rows() < 2) throw std::invalid_argument("ADE bandwidth needs at least two rows");
  double log_sd = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    const double var = (x.col(c).array() - mean).square().sum() / (n - 1.0);
    if (!(var > 0.0)) throw std::invalid_argument("ADE bandwidth: constant regressor column");
    log_sd += 0.5 * std::log(var);
  }
  return multiplier * std::exp(log_sd / static_cast<double>(x.cols())) * std::pow(n, -1.0 / 6.0);
}

/// Density-weighted average derivative of E[d | x] with a product Gaussian
/// kernel, in its symmetrized U-statistic form. Only (selected, censored)
/// pairs contribute, each through grad K evaluated at (x_s - x_c) / h.
inline Eigen::VectorXd average_derivative(const Eigen::VectorXi &d, const Eigen::MatrixXd &x,
                                          double h) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n < 2) throw std::invalid_argument("ADE needs at least two observations");
  if (d.size() != n) throw std::invalid_argument("ADE: d and x differ in length");
  if (p < 1) throw std::invalid_argument("ADE needs at least one regressor");
  if (!(h > 0.0)) throw std::invalid_argument("ADE bandwidth must be > 0");

  std::vector<Eigen::Index> sel, cens;
  for (Eigen::Index i = 0; i < n; ++i) (d[i] == 1 ? sel : cens).push_back(i);

  const Eigen::MatrixXd xs = x / h;
  const double norm_const = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(p));
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd u(p);
  for (Eigen::Index s : sel) {
    for (Eigen::Index c : cens) {
      u = xs.row(s) - xs.row(c);
      acc.noalias() += std::exp(-0.5 * u.squaredNorm()) * u;
    }
  }
  // -grad K(u) = u K(u)
  const double nn = static_cast<double>(n);
  return acc * (2.0 * norm_const / (nn * (nn - 1.0) * std::pow(h, static_cast<double>(p + 1))));
}

/// Normalized ADE direction: beta = delta / delta[0].
inline Eigen::VectorXd average_derivative_beta(const Eigen::VectorXi &d, const Eigen::MatrixXd &x,
                                               double h) {
  Eigen::VectorXd delta = average_derivative(d, x, h);
  if (!(delta[0] > 0.0))
    throw estimation_error("ADE: first component of the average derivative is not positive");
  Eigen::VectorXd beta = delta / delta[0];
  beta[0] = 1.0;
  return beta;
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_FIRSTSTAGE_HPP
