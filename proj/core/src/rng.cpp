#include "dpdgt/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dpdgt {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t agent, Channel channel) noexcept
    : key_(mix64(mix64(mix64(seed) ^ agent) ^ static_cast<std::uint64_t>(channel))) {}

std::uint64_t NoiseStream::bits(std::uint64_t iteration, std::uint64_t coordinate) const noexcept {
  return mix64(mix64(key_ ^ mix64(iteration)) + coordinate);
}

double NoiseStream::centered_uniform(std::uint64_t iteration,
                                     std::uint64_t coordinate) const noexcept {
  // 53 random bits, offset by half an ulp so both ends stay excluded.
  const double unit = (static_cast<double>(bits(iteration, coordinate) >> 11) + 0.5) * 0x1.0p-53;
  return unit - 0.5;
}

double NoiseStream::laplace(double theta, std::uint64_t iteration,
                            std::uint64_t coordinate) const {
  return laplace_sample(theta, centered_uniform(iteration, coordinate));
}

double laplace_sample(double theta, double u) {
  if (!(theta > 0.0)) throw std::invalid_argument("Laplace scale must be positive");
  if (!(u > -0.5 && u < 0.5)) throw std::invalid_argument("uniform variate must lie in (-1/2, 1/2)");
  const double magnitude = -theta * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(mix64(root) + a) ^ mix64(b + 0x632be59bd9b4e019ULL));
}

}  // namespace dpdgt
