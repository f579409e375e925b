#ifndef BOUNDARY_INTERCEPT_KERNELS_HPP
#define BOUNDARY_INTERCEPT_KERNELS_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace boundary_intercept {

/// One-sided kernels on [0, inf). The three polynomial kernels vanish past 1;
/// the Gaussian one is the untruncated half-normal density shape.
enum class KernelId { GaussianHalf, Epanechnikov, Polynomial7, Polyweight7 };

inline constexpr std::array<KernelId, 4> all_kernels{
    KernelId::GaussianHalf, KernelId::Epanechnikov, KernelId::Polynomial7,
    KernelId::Polyweight7};

inline std::string_view to_string(KernelId id) {
  switch (id) {
  case KernelId::GaussianHalf: return "gaussian";
  case KernelId::Epanechnikov: return "epanechnikov";
  case KernelId::Polynomial7: return "poly7";
  case KernelId::Polyweight7: return "polyweight7";
  }
  throw std::invalid_argument("unknown kernel id");
}

inline KernelId parse_kernel(std::string_view name) {
  for (KernelId id : all_kernels)
    if (to_string(id) == name) return id;
  throw std::invalid_argument("unknown kernel '" + std::string(name) +
                              "' (expected gaussian|epanechnikov|poly7|polyweight7)");
}

inline bool is_compact(KernelId id) { return id != KernelId::GaussianHalf; }

inline double eval_kernel(KernelId id, double t) {
  if (!std::isfinite(t) || t < 0.0)
    throw std::invalid_argument("kernel argument must be finite and >= 0");
  switch (id) {
  case KernelId::GaussianHalf:
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
  case KernelId::Epanechnikov:
    return t <= 1.0 ? 1.0 - t * t : 0.0;
  case KernelId::Polynomial7:
    return t <= 1.0 ? std::pow(1.0 - t, 7) : 0.0;
  case KernelId::Polyweight7:
    return t <= 1.0 ? std::pow(1.0 - t * t, 7) : 0.0;
  }
  throw std::invalid_argument("unknown kernel id");
}

namespace detail {

inline double factorial(int k) {
  double out = 1.0;
  for (int i = 2; i <= k; ++i) out *= i;
  return out;
}

// k!! with the conventions (-1)!! = 0!! = 1.
inline double double_factorial(int k) {
  double out = 1.0;
  for (int i = k; i > 1; i -= 2) out *= i;
  return out;
}

inline void check_order(int r) {
  if (r < 0 || r > 4) throw std::invalid_argument("kernel moment order must be in 0..4");
}

} // namespace detail

/// kappa_r = int_0^inf t^r k(t) dt, closed forms.
inline double kappa(KernelId id, int r) {
  detail::check_order(r);
  using detail::factorial, detail::double_factorial;
  switch (id) {
  case KernelId::GaussianHalf:
    return std::sqrt(std::pow(2.0, r - 2) / std::numbers::pi) *
           std::tgamma((r + 1) / 2.0);
  case KernelId::Epanechnikov:
    return 2.0 / ((r + 1.0) * (r + 3.0));
  case KernelId::Polynomial7:
    return factorial(7) * factorial(r) / factorial(r + 8);
  case KernelId::Polyweight7:
    return std::pow(2.0, 7) * factorial(7) * double_factorial(r - 1) /
           double_factorial(r + 15);
  }
  throw std::invalid_argument("unknown kernel id");
}

/// chi_r = int_0^inf t^r k(t)^2 dt, closed forms.
inline double chi(KernelId id, int r) {
  detail::check_order(r);
  using detail::factorial, detail::double_factorial;
  switch (id) {
  case KernelId::GaussianHalf:
    return std::tgamma((r + 1) / 2.0) / (4.0 * std::numbers::pi);
  case KernelId::Epanechnikov:
    return 8.0 / ((r + 1.0) * (r + 3.0) * (r + 5.0));
  case KernelId::Polynomial7:
    return factorial(14) * factorial(r) / factorial(r + 15);
  case KernelId::Polyweight7:
    return std::pow(2.0, 14) * factorial(14) * double_factorial(r - 1) /
           double_factorial(r + 29);
  }
  throw std::invalid_argument("unknown kernel id");
}

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Kernel moments and every constant derived from them.
struct KernelConstants {
  std::array<double, 5> kappa{};
  std::array<double, 5> chi{};
  double c_k = 0.0;   // local constant plug-in constant
  double c_kL = 0.0;  // local linear plug-in constant
  Matrix2 omegaL{};   // asymptotic covariance of (mu, g(1)) under local linear fitting
  double omegaQ22 = 0.0; // variance constant of g(1) under local quadratic fitting
  double omegaQ33 = 0.0; // variance constant of g'(1) under local quadratic fitting
};

/// Builds the derived constants from arbitrary moment vectors. Exposed so that
/// moments obtained another way (e.g. quadrature) go through the same algebra.
inline KernelConstants constants_from_moments(const std::array<double, 5> &kap,
                                              const std::array<double, 5> &ch) {
  KernelConstants kc;
  kc.kappa = kap;
  kc.chi = ch;
  const auto [k0, k1, k2, k3, k4] = kap;
  const auto [c0, c1, c2, c3, c4] = ch;

  kc.c_k = std::cbrt(c0 / (2.0 * k1 * k1));

  const double lin_num = k2 * k2 * c0 + k1 * k1 * c2 - 2.0 * k1 * k2 * c1;
  const double lin_bias = k1 * k3 - k2 * k2;
  if (lin_bias == 0.0)
    throw std::domain_error("degenerate kernel: kappa1*kappa3 == kappa2^2");
  kc.c_kL = std::pow(lin_num / (lin_bias * lin_bias), 0.2);

  const double det2 = k0 * k2 - k1 * k1;
  const double scale = 1.0 / (det2 * det2);
  const double off = k1 * k2 * c0 + k0 * k1 * c2 - (k0 * k2 + k1 * k1) * c1;
  kc.omegaL = {{{scale * lin_num, scale * off},
                {scale * off, scale * (k1 * k1 * c0 + k0 * k0 * c2 - 2.0 * k0 * k1 * c1)}}};

  const double det3 =
      k0 * k2 * k4 - k0 * k3 * k3 - k1 * k1 * k4 + 2.0 * k1 * k2 * k3 - k2 * k2 * k2;
  const double den = det3 * det3;
  {
    const double a = k1 * k4 - k2 * k3;
    const double b = k0 * k4 - k2 * k2;
    const double c = k0 * k3 - k1 * k2;
    kc.omegaQ22 =
        (a * a * c0 - 2.0 * a * b * c1 + (b * b + 2.0 * a * c) * c2 - b * c * c3 + c * c * c4) /
        den;
  }
  {
    const double a = k1 * k3 - k2 * k2;
    const double b = k0 * k3 - k1 * k2;
    const double c = k0 * k2 - k1 * k1;
    kc.omegaQ33 =
        (a * a * c0 - 2.0 * a * b * c1 + (b * b + 2.0 * a * c) * c2 - b * c * c3 + c * c * c4) /
        den;
  }
  return kc;
}

namespace detail {

inline KernelConstants compute_constants(KernelId id) {
  std::array<double, 5> kap{}, ch{};
  for (int r = 0; r < 5; ++r) {
    kap[r] = kappa(id, r);
    ch[r] = chi(id, r);
  }
  return constants_from_moments(kap, ch);
}

} // namespace detail

/// Cached per kernel; computed once on first use.
inline const KernelConstants &kernel_constants(KernelId id) {
  static const std::array<KernelConstants, 4> table{
      detail::compute_constants(KernelId::GaussianHalf),
      detail::compute_constants(KernelId::Epanechnikov),
      detail::compute_constants(KernelId::Polynomial7),
      detail::compute_constants(KernelId::Polyweight7)};
  return table[static_cast<std::size_t>(id)];
}

inline double ck_constant(KernelId id) { return kernel_constants(id).c_k; }
inline double ckL_constant(KernelId id) { return kernel_constants(id).c_kL; }
inline const Matrix2 &omegaL_matrix(KernelId id) { return kernel_constants(id).omegaL; }
inline double omegaQ22(KernelId id) { return kernel_constants(id).omegaQ22; }
inline double omegaQ33(KernelId id) { return kernel_constants(id).omegaQ33; }

/// Smoothed tail weight for the Andrews-Schafgans estimator: 0 for w <= 0,
/// 1 - exp(-w/(b-w)) on (0, b), 1 from b on.
inline double as_smoother(double w, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("smoother width b must be > 0");
  if (!std::isfinite(w)) throw std::invalid_argument("smoother argument must be finite");
  if (w <= 0.0) return 0.0;
  if (w >= b) return 1.0;
  return 1.0 - std::exp(-w / (b - w));
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_KERNELS_HPP
