#ifndef BOUNDARY_INTERCEPT_RNG_HPP
#define BOUNDARY_INTERCEPT_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace boundary_intercept {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3").
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Counter-based stream keyed by (seed, replication, tag). Draw k of a stream
/// is a pure function of the key and k, so streams split freely across
/// threads and replications without coordination.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint32_t replication, std::uint32_t tag)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replication_(replication), tag_(tag) {}

  /// Two uniforms in (0, 1) from block `block`.
  std::array<double, 2> uniform_pair(std::uint64_t block) const {
    const auto out = Philox4x32::apply({static_cast<std::uint32_t>(block),
                                        static_cast<std::uint32_t>(block >> 32), replication_, tag_},
                                       key_);
    return {to_unit((std::uint64_t{out[0]} << 32) | out[1]),
            to_unit((std::uint64_t{out[2]} << 32) | out[3])};
  }

  double uniform(std::uint64_t index) const { return uniform_pair(index / 2)[index % 2]; }

  /// Standard normal number `index` (Box-Muller on block index / 2).
  double normal(std::uint64_t index) const {
    const auto [u1, u2] = uniform_pair(index / 2);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return index % 2 == 0 ? r * std::cos(angle) : r * std::sin(angle);
  }

  /// Sequential access for callers that just want the next normal.
  double next_normal() {
    if (cursor_ % 2 == 0) {
      const auto [u1, u2] = uniform_pair(cursor_ / 2);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      cached_ = r * std::sin(angle);
      ++cursor_;
      return r * std::cos(angle);
    }
    ++cursor_;
    return cached_;
  }

private:
  // 53 high bits, shifted half an ulp off zero so the result lies in (0, 1)
  static double to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
  std::uint32_t replication_;
  std::uint32_t tag_;
  std::uint64_t cursor_ = 0;
  double cached_ = 0.0;
};

} // namespace boundary_intercept

#endif // BOUNDARY_INTERCEPT_RNG_HPP
