#pragma once

#include <cstdint>

namespace rigkit::sim {

struct NoiseSpec {
  double depth_sigma_m = 0.0;        // Gaussian range noise
  double ab_sigma = 0.0;             // multiplicative AB noise
  double invalid_probability = 0.0;  // per-pixel dropout
  std::uint64_t seed = 0;

  void validate() const;
};

/// Counter-based generator: every draw is a pure hash of
/// (seed, stream, frame, pixel, salt), so parallel rendering order can
/// never change the result.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame,
                           std::uint64_t pixel, std::uint64_t salt);

/// Uniform in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame,
                       std::uint64_t pixel, std::uint64_t salt);

/// Standard normal via Box-Muller on two independent uniforms.
double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t frame,
                        std::uint64_t pixel, std::uint64_t salt);

}  // namespace rigkit::sim
