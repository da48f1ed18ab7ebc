#include "driftlab/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "driftlab/errors.hpp"

namespace driftlab {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x6d726c64u};
  return std::mt19937_64(seq);
}

void require_dim(const Vec& v, int dim, const char* name) {
  if (v.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch, std::string(name) + " has dimension " +
                                                  std::to_string(v.size()) + ", expected " +
                                                  std::to_string(dim));
  }
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open_below() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::gaussian() {
  const double u1 = uniform_open_below();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential() { return -std::log(uniform_open_below()); }

Vec sample_gaussian(RngStream& rng, int dim, const Vec& mean, const Vec& cov_diag) {
  require_dim(mean, dim, "mean");
  require_dim(cov_diag, dim, "cov_diag");
  Vec out(dim);
  for (int i = 0; i < dim; ++i) {
    if (!(cov_diag(i) >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "negative variance in cov_diag");
    }
    const double z = rng.gaussian();
    out(i) = cov_diag(i) == 0.0 ? mean(i) : mean(i) + std::sqrt(cov_diag(i)) * z;
  }
  return out;
}

int noise_dim(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) return static_cast<int>(n.mean.size());
        if constexpr (std::is_same_v<T, UniformBoxNoise>) return static_cast<int>(n.lo.size());
        if constexpr (std::is_same_v<T, ShiftedExponentialNoise>)
          return static_cast<int>(n.shift.size());
      },
      noise);
}

Vec noise_mean(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& n) -> Vec {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) return n.mean;
        if constexpr (std::is_same_v<T, UniformBoxNoise>) return 0.5 * (n.lo + n.hi);
        if constexpr (std::is_same_v<T, ShiftedExponentialNoise>)
          return n.shift + n.rate.cwiseInverse();
      },
      noise);
}

Vec noise_variance(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& n) -> Vec {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) return n.cov_diag;
        if constexpr (std::is_same_v<T, UniformBoxNoise>)
          return (n.hi - n.lo).cwiseAbs2() / 12.0;
        if constexpr (std::is_same_v<T, ShiftedExponentialNoise>)
          return n.rate.cwiseAbs2().cwiseInverse();
      },
      noise);
}

void validate_noise(const NoiseSpec& noise) {
  const int dim = noise_dim(noise);
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "noise dimension must be positive");
  std::visit(
      [dim](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          require_dim(n.cov_diag, dim, "cov_diag");
          if ((n.cov_diag.array() < 0.0).any())
            throw Error(ErrorKind::InvalidArgument, "negative variance in cov_diag");
        } else if constexpr (std::is_same_v<T, UniformBoxNoise>) {
          require_dim(n.hi, dim, "hi");
          if ((n.hi.array() < n.lo.array()).any())
            throw Error(ErrorKind::InvalidArgument, "uniform box has hi < lo");
        } else {
          require_dim(n.rate, dim, "rate");
          if ((n.rate.array() <= 0.0).any())
            throw Error(ErrorKind::InvalidArgument, "exponential rate must be positive");
        }
      },
      noise);
}

Vec sample_noise(const NoiseSpec& noise, RngStream& rng) {
  return std::visit(
      [&rng](const auto& n) -> Vec {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          return sample_gaussian(rng, static_cast<int>(n.mean.size()), n.mean, n.cov_diag);
        } else if constexpr (std::is_same_v<T, UniformBoxNoise>) {
          const auto dim = static_cast<int>(n.lo.size());
          Vec out(dim);
          for (int i = 0; i < dim; ++i) out(i) = n.lo(i) + (n.hi(i) - n.lo(i)) * rng.uniform();
          return out;
        } else {
          const auto dim = static_cast<int>(n.shift.size());
          Vec out(dim);
          for (int i = 0; i < dim; ++i) out(i) = n.shift(i) + rng.exponential() / n.rate(i);
          return out;
        }
      },
      noise);
}

NoiseSpec gaussian_noise(int dim, double mean, double variance) {
  return GaussianNoise{Vec::Constant(dim, mean), Vec::Constant(dim, variance)};
}

NoiseSpec shifted_exponential_noise(double shift, double mean_excess) {
  return ShiftedExponentialNoise{Vec::Constant(1, shift), Vec::Constant(1, 1.0 / mean_excess)};
}

NoiseSpec zero_noise(int dim) { return gaussian_noise(dim, 0.0, 0.0); }

}  // namespace driftlab
