#pragma once

// Counter-based random numbers: Philox4x32-10 keyed by the run seed, with a
// separate counter space per (purpose, trajectory) so any trajectory can be
// regenerated on its own.

#include <array>
#include <cstdint>

namespace fbsde {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Purpose tags separating independent draws made for the same trajectory.
enum class StreamPurpose : std::uint32_t {
  Increments = 0,
  BridgeBase = 0x10000,  // + coarse step index
  Synthetic = 0x20000000,
};

/// Sequential view over one substream. Cheap to construct; draws are a pure
/// function of (seed, purpose, index, draw number).
class Substream {
 public:
  Substream(std::uint64_t seed, std::uint32_t purpose, std::uint64_t index) noexcept;

  /// Uniform in the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal by inverse-CDF transform of uniform().
  double normal() noexcept;

 private:
  PhiloxKey key_;
  PhiloxCounter counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Inverse of the standard normal CDF for p in (0, 1): rational initial guess
/// refined by one Halley step against erfc.
double normal_quantile(double p) noexcept;

double normal_cdf(double x) noexcept;

/// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace fbsde
