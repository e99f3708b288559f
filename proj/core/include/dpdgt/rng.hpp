#pragma once

#include <cstdint>

namespace dpdgt {

/// Noise channels. Each agent draws one value per channel per iteration and
/// coordinate.
enum class Channel : std::uint64_t {
  kTracking = 1,  ///< xi: added to the pushed deviation estimate
  kDual = 2,      ///< zeta: added to the pulled dual drive
  kAux = 3,       ///< free for tests and sweeps
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based uniform stream keyed by (seed, agent, channel). The draw for
/// (iteration, coordinate) depends on nothing else, so any subset of draws can
/// be regenerated in any order and two runs with one seed see the same noise.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t agent, Channel channel) noexcept;

  /// 64 random bits for (iteration, coordinate).
  std::uint64_t bits(std::uint64_t iteration, std::uint64_t coordinate = 0) const noexcept;
  /// Uniform in the open interval (-1/2, 1/2).
  double centered_uniform(std::uint64_t iteration, std::uint64_t coordinate = 0) const noexcept;
  /// Laplace draw with scale theta > 0.
  double laplace(double theta, std::uint64_t iteration, std::uint64_t coordinate = 0) const;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

/// Inverse-CDF Laplace transform of u in (-1/2, 1/2):
/// -theta * sign(u) * ln(1 - 2|u|). Throws std::invalid_argument for theta <= 0.
double laplace_sample(double theta, double u);

/// Deterministic child seed, e.g. one per Monte-Carlo replica.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace dpdgt
