#ifndef BOUNDARY_INTERCEPT_DGP_HPP
#define BOUNDARY_INTERCEPT_DGP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace boundary_intercept {

enum class EpsDist { Normal, StudentT3std, ChiSq3std };

inline std::string_view to_string(EpsDist d) {
  switch (d) {
  case EpsDist::Normal: return "normal";
  case EpsDist::StudentT3std: return "t3";
  case EpsDist::ChiSq3std: return "chisq3";
  }
  return "unknown";
}

inline EpsDist parse_eps_dist(std::string_view s) {
  for (EpsDist d : {EpsDist::Normal, EpsDist::StudentT3std, EpsDist::ChiSq3std})
    if (to_string(d) == s) return d;
  throw std::invalid_argument("unknown disturbance '" + std::string(s) +
                              "' (expected normal|t3|chisq3)");
}

/// Zero-mean, unit-variance draw from the given family.
///   t(3) / sqrt(3)          with t(3) = Z / sqrt(chi2_3 / 3)
///   (chi2_3 - 3) / sqrt(6)  with chi2_3 a sum of three squared normals
inline double standardized_draw(EpsDist dist, RngStream &stream) {
  switch (dist) {
  case EpsDist::Normal:
    return stream.next_normal();
  case EpsDist::StudentT3std: {
    const double z = stream.next_normal();
    double q = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double g = stream.next_normal();
      q += g * g;
    }
    return z / std::sqrt(q / 3.0) / std::sqrt(3.0);
  }
  case EpsDist::ChiSq3std: {
    double q = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double g = stream.next_normal();
      q += g * g;
    }
    return (q - 3.0) / std::sqrt(6.0);
  }
  }
  throw std::invalid_argument("unknown disturbance family");
}

/// Stream tags; each simulated variable owns one stream per replication.
enum class VariableTag : std::uint32_t { X1 = 1, X2 = 2, Eps = 3, E = 4 };

inline RngStream make_stream(std::uint64_t seed, std::uint32_t rep, VariableTag tag) {
  return RngStream(seed, rep, static_cast<std::uint32_t>(tag));
}

inline constexpr std::uint64_t calibration_seed = 0x0C0FFEE5EEDULL;
inline constexpr std::size_t calibration_draws = 2'000'000;

/// Offset c0 with Pr(c0 + X1 + X2 > eps) = target_p, i.e. the target_p
/// quantile of eps - X1 - X2, estimated from a fixed calibration sample.
/// Results are memoized per (family, target).
inline double calibrate_c0(EpsDist dist, double target_p,
                           std::size_t draws = calibration_draws,
                           std::uint64_t seed = calibration_seed) {
  if (!(target_p > 0.0 && target_p < 1.0))
    throw std::invalid_argument("target selection probability must lie in (0, 1)");
  static std::mutex mutex;
  static std::map<std::tuple<int, double, std::size_t, std::uint64_t>, double> cache;
  const auto key = std::make_tuple(static_cast<int>(dist), target_p, draws, seed);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto x1 = make_stream(seed, 0, VariableTag::X1);
  auto x2 = make_stream(seed, 0, VariableTag::X2);
  auto eps = make_stream(seed, 0, VariableTag::Eps);
  std::vector<double> s(draws);
  for (auto &v : s) {
    const double a = x1.next_normal();
    const double b = standardized_draw(EpsDist::StudentT3std, x2);
    v = standardized_draw(dist, eps) - a - b;
  }
  const auto rank = static_cast<std::size_t>(std::ceil(target_p * static_cast<double>(draws)));
  const auto k = std::clamp<std::size_t>(rank, 1, draws) - 1;
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end());
  const double c0 = s[k];
  std::lock_guard lock(mutex);
  cache.emplace(key, c0);
  return c0;
}

/// One simulation design. c0 is resolved from selection_prob unless given.
struct SimulationDesign {
  EpsDist eps_dist = EpsDist::Normal;
  double selection_prob = 0.5;
  std::optional<double> c0;
  long n = 1000;
  double mu0 = 0.0;
  std::uint64_t base_seed = 20240601;

  double resolved_c0() const { return c0 ? *c0 : calibrate_c0(eps_dist, selection_prob); }
};

inline void check_design(const SimulationDesign &d) {
  if (d.n < 50) throw std::invalid_argument("design sample size must be >= 50");
  if (!(d.selection_prob > 0.0 && d.selection_prob < 1.0))
    throw std::invalid_argument("design selection_prob must lie in (0, 1)");
}

/// D = 1{c0 + X1 + X2 > eps}, Y* = mu0 + eps + e, Y = Y* D.
inline Dataset generate(const SimulationDesign &design, std::uint32_t replication) {
  check_design(design);
  const double c0 = design.resolved_c0();
  auto x1s = make_stream(design.base_seed, replication, VariableTag::X1);
  auto x2s = make_stream(design.base_seed, replication, VariableTag::X2);
  auto epss = make_stream(design.base_seed, replication, VariableTag::Eps);
  auto es = make_stream(design.base_seed, replication, VariableTag::E);

  const auto n = static_cast<Eigen::Index>(design.n);
  Dataset data;
  data.y.resize(n);
  data.d.resize(n);
  data.x.resize(n, 2);
  data.z.resize(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = x1s.next_normal();
    const double x2 = standardized_draw(EpsDist::StudentT3std, x2s);
    const double eps = standardized_draw(design.eps_dist, epss);
    const double u = eps + es.next_normal();
    const int d = c0 + x1 + x2 > eps ? 1 : 0;
    data.x(i, 0) = x1;
    data.x(i, 1) = x2;
    data.d[i] = d;
    data.y[i] = d == 1 ? design.mu0 + u : 0.0;
  }
  return data;
}

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_DGP_HPP
