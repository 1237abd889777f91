#pragma once

#include <array>
#include <cstdint>

namespace jumplan {

/// Identifies one independent reproducible random stream.
struct SeedSpec {
  std::uint64_t root_seed = 0;
  std::uint64_t stream_id = 0;
};

/// xoshiro256++ keyed by (root_seed, stream_id, substream) through SplitMix64.
/// Streams with distinct keys are statistically independent; equal keys give
/// identical sequences on every platform.
class Rng {
 public:
  explicit Rng(SeedSpec seed, std::uint64_t substream = 0);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();

  /// Standard normal by Box-Muller; the second variate is cached.
  double normal();

  /// Poisson(mean) by sequential inversion; means above 10 are split into
  /// independent chunks of at most 10.
  std::int32_t poisson(double mean);

 private:
  std::int32_t poisson_inversion(double mean);

  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace jumplan
