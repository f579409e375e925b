#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include <boundary_intercept/dgp.hpp>
#include <boundary_intercept/firststage.hpp>

using namespace boundary_intercept;

namespace {

// Plain gradient ascent on the mean log-likelihood with backtracking. Slow but
// shares nothing with the Newton solver beyond the likelihood definition.
Eigen::VectorXd gradient_ascent_probit(const Eigen::VectorXi &d, const Eigen::MatrixXd &X) {
  const double n = static_cast<double>(X.rows());
  auto loglik = [&](const Eigen::VectorXd &b) {
    double ll = 0.0;
    const Eigen::VectorXd v = X * b;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      ll += std::log(0.5 * std::erfc(-(d[i] == 1 ? v[i] : -v[i]) / std::sqrt(2.0)));
    return ll / n;
  };
  auto gradient = [&](const Eigen::VectorXd &b) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(b.size());
    const Eigen::VectorXd v = X * b;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double q = d[i] == 1 ? 1.0 : -1.0;
      const double z = q * v[i];
      const double ratio = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI) / (0.5 * std::erfc(-z / std::sqrt(2.0)));
      g += (q * ratio) * X.row(i).transpose();
    }
    return Eigen::VectorXd(g / n);
  };
  Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
  double step = 1.0;
  for (int iter = 0; iter < 20000; ++iter) {
    const Eigen::VectorXd g = gradient(b);
    if (g.cwiseAbs().maxCoeff() < 1e-11) break;
    const double base = loglik(b);
    while (loglik(b + step * g) < base) step *= 0.5;
    b += step * g;
    step *= 1.5;
  }
  return b;
}

struct ProbitSample {
  Eigen::VectorXi d;
  Eigen::MatrixXd X;
};

ProbitSample probit_sample(Eigen::Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  std::student_t_distribution<double> t3(3.0);
  ProbitSample s{Eigen::VectorXi(n), Eigen::MatrixXd(n, 3)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = norm(gen), x2 = t3(gen) / std::sqrt(3.0);
    s.X.row(i) << 1.0, x1, x2;
    s.d[i] = x1 + x2 > norm(gen) ? 1 : 0;
  }
  return s;
}

Dataset selection_dataset(Eigen::Index n, Eigen::Index q, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> norm;
  Dataset data;
  data.y.resize(n);
  data.d.resize(n);
  data.x.resize(n, 2);
  data.z.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = norm(gen), x2 = norm(gen), eps = norm(gen);
    data.x.row(i) << x1, x2;
    for (Eigen::Index k = 0; k < q; ++k) data.z(i, k) = norm(gen);
    data.d[i] = x1 + 0.5 * x2 > eps ? 1 : 0;
    double y = 1.0 + 0.7 * eps + norm(gen);
    for (Eigen::Index k = 0; k < q; ++k) y += (k + 1.0) * data.z(i, k);
    data.y[i] = data.d[i] == 1 ? y : 0.0;
  }
  return data;
}

// Literal double sum over all ordered pairs with the selection indicator of
// the evaluation point, as in the leave-one-out density-derivative form.
Eigen::VectorXd ade_brute_force(const Eigen::VectorXi &d, const Eigen::MatrixXd &x, double h) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Eigen::VectorXd u = (x.row(i) - x.row(j)).transpose() / h;
      const double k = std::pow(2.0 * M_PI, -0.5 * p) * std::exp(-0.5 * u.squaredNorm());
      const Eigen::VectorXd grad = -u * k;
      acc += grad * d[i];
    }
  }
  const double nn = static_cast<double>(n);
  return -2.0 / (nn * (nn - 1.0) * std::pow(h, p + 1.0)) * acc;
}

} // namespace

TEST(Probit, InterceptOnlyHalf) {
  Eigen::VectorXi d(1000);
  for (int i = 0; i < 1000; ++i) d[i] = i % 2;
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1000, 1);
  EXPECT_NEAR(probit_mle(d, X)[0], 0.0, 1e-12);
}

TEST(Probit, InterceptOnlyPhiOne) {
  Eigen::VectorXi d = Eigen::VectorXi::Zero(10000);
  d.head(8413).setOnes();
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10000, 1);
  EXPECT_NEAR(probit_mle(d, X)[0], 1.0, 1e-3);
}

TEST(Probit, MatchesGradientAscentOracle) {
  const auto s = probit_sample(20000, 5);
  const Eigen::VectorXd newton = probit_mle(s.d, s.X);
  const Eigen::VectorXd oracle = gradient_ascent_probit(s.d, s.X);
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(newton[k], oracle[k], 1e-6);
}

TEST(Probit, LargeSampleRecoversTruth) {
  const auto s = probit_sample(100000, 9);
  const Eigen::VectorXd coef = probit_mle(s.d, s.X);
  const auto terms = detail::probit_terms(s.d, s.X, coef);
  const Eigen::MatrixXd cov = terms.info.inverse();
  const Eigen::Vector3d truth(0.0, 1.0, 1.0);
  for (Eigen::Index k = 0; k < 3; ++k)
    EXPECT_LT(std::abs(coef[k] - truth[k]), 3.0 * std::sqrt(cov(k, k))) << "coef " << k;
}

TEST(Probit, LikelihoodNondecreasingAlongIterations) {
  const auto s = probit_sample(3000, 21);
  double prev = -INFINITY;
  for (double tol = 1.0; tol >= 1e-10; tol /= 10.0) {
    ProbitOptions opt;
    opt.gradient_tol = tol;
    const double ll = detail::probit_loglik(s.d, s.X, probit_mle(s.d, s.X, opt));
    EXPECT_GE(ll, prev);
    prev = ll;
  }
  // the optimum beats nearby points
  const Eigen::VectorXd best = probit_mle(s.d, s.X);
  const double top = detail::probit_loglik(s.d, s.X, best);
  for (Eigen::Index k = 0; k < 3; ++k) {
    Eigen::VectorXd moved = best;
    moved[k] += 1e-3;
    EXPECT_LT(detail::probit_loglik(s.d, s.X, moved), top);
  }
}

TEST(Probit, SeparationAndSingularity) {
  Eigen::MatrixXd X(200, 2);
  Eigen::VectorXi d(200);
  for (int i = 0; i < 200; ++i) {
    X.row(i) << 1.0, i - 99.5;
    d[i] = i >= 100 ? 1 : 0;
  }
  EXPECT_THROW(probit_mle(d, X), estimation_error);
  EXPECT_THROW(probit_mle(Eigen::VectorXi::Ones(200), X), estimation_error);

  const auto s = probit_sample(500, 2);
  Eigen::MatrixXd dup(500, 3);
  dup << s.X.col(0), s.X.col(1), s.X.col(1);
  EXPECT_THROW(probit_mle(s.d, dup), rank_deficiency_error);
}

TEST(TwoStep, WithoutMillsIsOls) {
  const Dataset data = selection_dataset(800, 2, 17);
  TwoStepOptions opt;
  opt.include_mills = false;
  const TwoStepFit fit = heckman_two_step(data, opt);

  const Eigen::Index m = data.selected_count();
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd y(m);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.d[i] != 1) continue;
    X.row(row) << 1.0, data.z(i, 0), data.z(i, 1);
    y[row++] = data.y[i];
  }
  const Eigen::VectorXd ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  EXPECT_NEAR(fit.mu, ols[0], 1e-10);
  EXPECT_NEAR(fit.theta[0], ols[1], 1e-10);
  EXPECT_NEAR(fit.theta[1], ols[2], 1e-10);
  EXPECT_EQ(fit.mills_coef, 0.0);
}

TEST(TwoStep, RobustCovarianceFormula) {
  const Dataset data = selection_dataset(400, 1, 3);
  Eigen::MatrixXd X(data.size(), 2);
  X << Eigen::VectorXd::Ones(data.size()), data.z.col(0);
  const Eigen::VectorXd y = data.z.col(0) * 2.0 + data.x.col(0);
  const OlsFit fit = ols_robust(X, y);
  const Eigen::VectorXd e = y - X * fit.coef;
  Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < X.rows(); ++i) meat += e[i] * e[i] * X.row(i).transpose() * X.row(i);
  const Eigen::Matrix2d bread = (X.transpose() * X).inverse();
  const Eigen::Matrix2d cov = bread * meat * bread;
  EXPECT_NEAR((fit.cov - cov).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(TwoStep, CorrectsSelectionBias) {
  const Dataset data = selection_dataset(20000, 0, 29);
  const TwoStepFit fit = heckman_two_step(data);
  EXPECT_NEAR(fit.mu, 1.0, 4.0 * fit.se_mu);
  EXPECT_GT(fit.se_mu, 0.0);
  TwoStepOptions plain;
  plain.include_mills = false;
  // selected rows have eps below the index, so ignoring selection biases mu down
  EXPECT_LT(heckman_two_step(data, plain).mu, 0.8);
}

TEST(TwoStep, ConstantMillsColumnIsCollinear) {
  Dataset data = selection_dataset(300, 0, 8);
  data.d.setOnes();
  EXPECT_THROW(heckman_two_step(data), estimation_error);
  const Eigen::VectorXd constant_index = Eigen::VectorXd::Constant(data.size(), 0.3);
  EXPECT_THROW(heckman_second_step(data, constant_index), rank_deficiency_error);
}

TEST(Ade, MatchesBruteForceDefinition) {
  const Dataset data = selection_dataset(60, 0, 41);
  const double h = 0.7;
  const Eigen::VectorXd fast = average_derivative(data.d, data.x, h);
  const Eigen::VectorXd slow = ade_brute_force(data.d, data.x, h);
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(fast[k], slow[k], 1e-12 * std::abs(slow[k]) + 1e-15);
  // positive dependence of d on both regressors gives positive derivatives
  EXPECT_GT(fast[0], 0.0);
  EXPECT_GT(fast[1], 0.0);
}

TEST(Ade, AntisymmetricInSelection) {
  const Dataset data = selection_dataset(300, 0, 4);
  const double h = default_ade_bandwidth(data.x);
  const Eigen::VectorXi flipped = Eigen::VectorXi::Ones(data.size()) - data.d;
  const Eigen::VectorXd a = average_derivative(data.d, data.x, h);
  const Eigen::VectorXd b = average_derivative(flipped, data.x, h);
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(a[k], -b[k], 1e-12 * std::abs(a[k]));
}

TEST(Ade, PermutationInvariant) {
  const Dataset data = selection_dataset(300, 0, 6);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(data.size()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), std::mt19937(1));
  Eigen::VectorXi d2(data.size());
  Eigen::MatrixXd x2(data.size(), 2);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    d2[i] = data.d[perm[static_cast<std::size_t>(i)]];
    x2.row(i) = data.x.row(perm[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd a = average_derivative(data.d, data.x, 0.5);
  const Eigen::VectorXd b = average_derivative(d2, x2, 0.5);
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(a[k], b[k], 1e-12 * std::abs(a[k]));
}

TEST(Ade, BetaNormalizationAndErrors) {
  const Dataset data = selection_dataset(400, 0, 12);
  const Eigen::VectorXd beta = average_derivative_beta(data.d, data.x, default_ade_bandwidth(data.x));
  EXPECT_EQ(beta[0], 1.0);
  // the design has beta = (1, 0.5)
  EXPECT_NEAR(beta[1], 0.5, 0.3);

  Eigen::MatrixXd negated = data.x;
  negated.col(0) *= -1.0;
  EXPECT_THROW(average_derivative_beta(data.d, negated, 0.5), estimation_error);
  EXPECT_THROW(average_derivative(data.d.head(1), data.x.topRows(1), 0.5), std::invalid_argument);
  EXPECT_THROW(average_derivative(data.d, data.x, 0.0), std::invalid_argument);
}

TEST(Ade, IrrelevantRegressorVanishes) {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> norm;
  const Eigen::Index n = 10000;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXi d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) << norm(gen), norm(gen);
    d[i] = x(i, 0) > norm(gen) ? 1 : 0;
  }
  const Eigen::VectorXd beta = average_derivative_beta(d, x, default_ade_bandwidth(x));
  EXPECT_LT(std::abs(beta[1]), 0.1);
}

TEST(Ade, SimulationDesignCalibration) {
  SimulationDesign design;
  design.c0 = 0.0;
  design.n = 4000;
  design.base_seed = 777;
  int within = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const Dataset data = generate(design, static_cast<std::uint32_t>(r));
    const Eigen::VectorXd beta = average_derivative_beta(data.d, data.x, default_ade_bandwidth(data.x));
    if (std::abs(beta[1] - 1.0) < 0.15) ++within;
  }
  RecordProperty("fraction_within", std::to_string(within / static_cast<double>(reps)));
  EXPECT_GE(within, static_cast<int>(0.95 * reps));
}

TEST(Ade, DefaultBandwidth) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 2, 2, 4, 3, 6;
  // column SDs s and 2s: geometric mean sqrt(2) s
  const double s = std::sqrt(5.0 / 3.0);
  EXPECT_NEAR(default_ade_bandwidth(x), std::sqrt(2.0) * s * std::pow(4.0, -1.0 / 6.0), 1e-14);
  EXPECT_NEAR(default_ade_bandwidth(x, 2.0), 2.0 * default_ade_bandwidth(x), 1e-14);
  x.col(1).setConstant(1.0);
  EXPECT_THROW(default_ade_bandwidth(x), std::invalid_argument);
}

TEST(FirstStage, MakeFirstStage) {
  const Dataset data = selection_dataset(50, 1, 1);
  const Eigen::Vector2d beta(1.0, 0.5);
  const auto fs = make_first_stage(data, beta, Eigen::VectorXd::Zero(1));
  EXPECT_NEAR((fs.w_hat - data.x * beta).cwiseAbs().maxCoeff(), 0.0, 0.0);
  EXPECT_THROW(make_first_stage(data, Eigen::Vector2d(2.0, 0.5), Eigen::VectorXd::Zero(1)),
               std::invalid_argument);
  EXPECT_THROW(make_first_stage(data, beta, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}
