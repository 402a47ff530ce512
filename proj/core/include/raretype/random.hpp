#pragma once

#include <cstdint>
#include <random>

namespace raretype {

/// Seedable generator used by every stochastic routine.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The variate transforms below are implemented here rather than
/// through <random> distributions, whose algorithms are left to the standard
/// library vendor; this keeps draws identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform on (0, 1); never returns 0.
  double uniform_open01();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the U^(1/shape) boost.
  double gamma(double shape);

  /// Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
  double beta(double a, double b);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `index` of `master`: splitmix64(master + (index + 1) * golden gamma).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace raretype
