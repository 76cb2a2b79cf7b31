#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cemimo {

/// Independent random streams. Every draw in the library comes from an
/// engine seeded by `derive_seed(seed, stream, a, b)`, so channel, symbol,
/// initialization and noise draws never share state and a trial's draws do
/// not depend on which worker thread runs it.
///
///   channel   a = channel index
///   symbols   a = channel index, b = symbol frame index
///   init      a = channel index, b = symbol frame index
///   noise     a = caller-chosen index
enum class Stream : std::uint64_t {
  channel = 0x43484e4c,
  symbols = 0x53594d42,
  init = 0x494e4954,
  noise = 0x4e4f4953,
};

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                          std::uint64_t b = 0) noexcept;

Engine make_engine(std::uint64_t seed);

/// Circularly symmetric complex Gaussian with total variance `variance`
/// (each of the real and imaginary parts carries half).
template <typename Real>
class ComplexGaussian {
 public:
  explicit ComplexGaussian(double variance = 1.0) : normal_(0.0, std::sqrt(variance / 2.0)) {}

  template <typename Gen>
  std::complex<Real> operator()(Gen& gen) {
    const double re = normal_(gen);
    const double im = normal_(gen);
    return {static_cast<Real>(re), static_cast<Real>(im)};
  }

 private:
  std::normal_distribution<double> normal_;
};

}  // namespace cemimo
