// Independent reference computations used only by the tests.
#ifndef BOUNDARY_INTERCEPT_TESTS_ORACLES_HPP
#define BOUNDARY_INTERCEPT_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

namespace detail {

inline double simpson_step(const std::function<double(double)> &f, double a, double b, double fa,
                           double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature with Richardson correction, applied on
/// `pieces` equal sub-intervals.
inline double integrate(const std::function<double(double)> &f, double a, double b,
                        double eps = 1e-14, int pieces = 16) {
  double total = 0.0;
  const double w = (b - a) / pieces;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + k * w, hi = lo + w;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::simpson_step(f, lo, hi, fa, fm, fb, whole, eps / pieces, 40);
  }
  return total;
}

/// Exact rational arithmetic on 128-bit integers (small denominators only).
struct Rational {
  __int128 num = 0;
  __int128 den = 1;

  Rational() = default;
  Rational(long long n, long long d = 1) : num(n), den(d) { normalize(); }

  static __int128 gcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const __int128 g = gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  friend Rational operator+(Rational a, const Rational &b) {
    Rational r;
    r.num = a.num * b.den + b.num * a.den;
    r.den = a.den * b.den;
    r.normalize();
    return r;
  }
  friend Rational operator-(Rational a, const Rational &b) {
    Rational r;
    r.num = a.num * b.den - b.num * a.den;
    r.den = a.den * b.den;
    r.normalize();
    return r;
  }
  friend Rational operator*(Rational a, const Rational &b) {
    Rational r;
    r.num = a.num * b.num;
    r.den = a.den * b.den;
    r.normalize();
    return r;
  }
  friend Rational operator/(Rational a, const Rational &b) {
    Rational r;
    r.num = a.num * b.den;
    r.den = a.den * b.num;
    r.normalize();
    return r;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Zooming grid search: evaluates f on a (points^d) grid, recenters on the
/// best point and shrinks the box, `rounds` times. Adequate for the convex
/// quadratic objectives of local polynomial fitting.
template <std::size_t D>
std::array<double, D> grid_minimize(const std::function<double(const std::array<double, D> &)> &f,
                                    std::array<double, D> center, std::array<double, D> half_width,
                                    int rounds = 60, int points = 11, double shrink = 0.6) {
  for (int round = 0; round < rounds; ++round) {
    std::array<double, D> best = center;
    double best_val = f(center);
    std::array<int, D> idx{};
    while (true) {
      std::array<double, D> p;
      for (std::size_t k = 0; k < D; ++k)
        p[k] = center[k] + half_width[k] * (2.0 * idx[k] / (points - 1) - 1.0);
      const double v = f(p);
      if (v < best_val) {
        best_val = v;
        best = p;
      }
      std::size_t k = 0;
      while (k < D && ++idx[k] == points) idx[k++] = 0;
      if (k == D) break;
    }
    center = best;
    for (auto &w : half_width) w *= shrink;
  }
  return center;
}

/// Standard normal CDF by quadrature of the density.
inline double normal_cdf(double x) {
  const double half = integrate([](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); },
                                0.0, std::abs(x), 1e-15);
  return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

} // namespace oracle

#endif // BOUNDARY_INTERCEPT_TESTS_ORACLES_HPP
