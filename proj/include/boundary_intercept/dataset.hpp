#ifndef BOUNDARY_INTERCEPT_DATASET_HPP
#define BOUNDARY_INTERCEPT_DATASET_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace boundary_intercept {

/// Observed sample of a selection model. y is only meaningful where d == 1.
/// x holds the selection regressors (no constant column), z the outcome
/// regressors (may have zero columns).
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXi d;
  Eigen::MatrixXd x;
  Eigen::MatrixXd z;

  Eigen::Index size() const { return d.size(); }
  Eigen::Index selected_count() const { return d.sum(); }
};

inline void validate(const Dataset &data) {
  const auto n = data.d.size();
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (data.y.size() != n || data.x.rows() != n || data.z.rows() != n)
    throw std::invalid_argument("dataset arrays differ in length");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.d[i] != 0 && data.d[i] != 1)
      throw std::invalid_argument("selection indicator must be 0 or 1 (row " + std::to_string(i) + ")");
    if (data.d[i] == 1 && !std::isfinite(data.y[i]))
      throw std::invalid_argument("non-finite outcome on a selected row " + std::to_string(i));
  }
  if (!data.x.allFinite() || !data.z.allFinite())
    throw std::invalid_argument("regressors contain non-finite values");
}

/// Outcome residual y_i - z_i'theta. Only call on selected rows.
inline double outcome_residual(const Dataset &data, const Eigen::VectorXd &theta, Eigen::Index i) {
  double r = data.y[i];
  if (data.z.cols() > 0) r -= data.z.row(i).dot(theta);
  return r;
}

inline Eigen::VectorXd zero_theta(const Dataset &data) {
  return Eigen::VectorXd::Zero(data.z.cols());
}

inline void check_theta(const Dataset &data, const Eigen::VectorXd &theta) {
  if (theta.size() != data.z.cols())
    throw std::invalid_argument("theta length " + std::to_string(theta.size()) +
                                " does not match " + std::to_string(data.z.cols()) +
                                " outcome regressors");
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_DATASET_HPP
