#pragma once

#include <cstdint>
#include <random>
#include <variant>

#include "driftlab/linalg.hpp"

namespace driftlab {

/// Reproducible random stream keyed by (seed, stream id).
///
/// Equal keys give bitwise-identical draw sequences on every platform: the
/// engine is std::mt19937_64 and all variates are derived from its raw 64-bit
/// output here rather than through the implementation-defined std::*
/// distributions. A stream is single-owner; parallel code derives one stream
/// per trajectory.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_below();
  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double gaussian();
  /// Exponential with unit rate.
  double exponential();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// Stream id for trajectory `index` under a base id.
inline std::uint64_t derive_stream_id(std::uint64_t base_id, std::uint64_t index) {
  return base_id ^ index;
}

/// N(mean, diag(cov_diag)) draw. cov_diag entries must be >= 0; a zero
/// variance reproduces the mean coordinate exactly.
Vec sample_gaussian(RngStream& rng, int dim, const Vec& mean, const Vec& cov_diag);

struct GaussianNoise {
  Vec mean;
  Vec cov_diag;
};

/// Independent uniform coordinates on the box [lo, hi].
struct UniformBoxNoise {
  Vec lo;
  Vec hi;
};

/// shift + Exp(rate) per coordinate; nonnegative whenever shift >= 0.
struct ShiftedExponentialNoise {
  Vec shift;
  Vec rate;
};

using NoiseSpec = std::variant<GaussianNoise, UniformBoxNoise, ShiftedExponentialNoise>;

int noise_dim(const NoiseSpec& noise);
Vec noise_mean(const NoiseSpec& noise);
/// Per-coordinate variance.
Vec noise_variance(const NoiseSpec& noise);
/// Throws DimensionMismatch / InvalidArgument on malformed parameters.
void validate_noise(const NoiseSpec& noise);
Vec sample_noise(const NoiseSpec& noise, RngStream& rng);

/// Convenience constructors for the scalar and isotropic cases.
NoiseSpec gaussian_noise(int dim, double mean, double variance);
NoiseSpec shifted_exponential_noise(double shift, double mean_excess);
NoiseSpec zero_noise(int dim);

}  // namespace driftlab
