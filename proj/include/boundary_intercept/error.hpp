#ifndef BOUNDARY_INTERCEPT_ERROR_HPP
#define BOUNDARY_INTERCEPT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace boundary_intercept {

/// Raised when an estimator cannot produce a value on the data it was given
/// (empty kernel window, rank-deficient normal equations, separation, ...).
/// Precondition violations on arguments throw std::invalid_argument instead.
class estimation_error : public std::runtime_error {
public:
  explicit estimation_error(const std::string &what)
      : std::runtime_error(what) {}
};

class rank_deficiency_error : public estimation_error {
public:
  explicit rank_deficiency_error(const std::string &what)
      : estimation_error(what) {}
};

class empty_window_error : public estimation_error {
public:
  explicit empty_window_error(const std::string &what)
      : estimation_error(what) {}
};

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_ERROR_HPP
