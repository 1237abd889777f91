#include "jumplan/rng.hpp"

#include "jumplan/model.hpp"

#include <cmath>
#include <numbers>

namespace jumplan {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr double kMaxInversionMean = 10.0;

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(SeedSpec seed, std::uint64_t substream) {
  std::uint64_t key = seed.root_seed;
  std::uint64_t mix = splitmix64(key);
  key = mix ^ (seed.stream_id * 0xD1B54A32D192ED03ULL);
  mix = splitmix64(key);
  key = mix ^ (substream * 0xAEF17502108EF2D9ULL);
  for (auto& word : state_) word = splitmix64(key);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::int32_t Rng::poisson_inversion(double mean) {
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::int32_t k = 0;
  while (u > cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && cdf < u) break;  // cdf saturated below u by round-off
  }
  return k;
}

std::int32_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  std::int32_t total = 0;
  double remaining = mean;
  while (remaining > kMaxInversionMean) {
    total += poisson_inversion(kMaxInversionMean);
    remaining -= kMaxInversionMean;
  }
  return total + poisson_inversion(remaining);
}

}  // namespace jumplan
