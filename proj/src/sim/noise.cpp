#include "rigkit/sim/noise.hpp"

#include <cmath>
#include <numbers>

#include "rigkit/types.hpp"

namespace rigkit::sim {

void NoiseSpec::validate() const {
  if (depth_sigma_m < 0 || ab_sigma < 0) {
    raise(ErrorCode::DomainError, "noise sigmas must be non-negative");
  }
  if (invalid_probability < 0 || invalid_probability > 1) {
    raise(ErrorCode::DomainError, "invalid-pixel probability must lie in [0, 1]");
  }
}

namespace {

// SplitMix64 finalizer; full-period bijective mixing of the counter words.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame,
                           std::uint64_t pixel, std::uint64_t salt) {
  std::uint64_t h = mix(seed ^ 0x2545f4914f6cdd1dull);
  h = mix(h ^ stream);
  h = mix(h ^ frame);
  h = mix(h ^ pixel);
  h = mix(h ^ salt);
  return h;
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame,
                       std::uint64_t pixel, std::uint64_t salt) {
  return static_cast<double>(counter_hash(seed, stream, frame, pixel, salt) >> 11) *
         0x1.0p-53;
}

double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame,
                        std::uint64_t pixel, std::uint64_t salt) {
  // Box-Muller; u1 is kept away from zero so the log stays finite.
  const double u1 =
      (static_cast<double>(counter_hash(seed, stream, frame, pixel, salt * 2) >> 11) + 1.0) *
      0x1.0p-53;
  const double u2 = counter_uniform(seed, stream, frame, pixel, salt * 2 + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rigkit::sim
