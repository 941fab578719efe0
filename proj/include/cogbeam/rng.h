#ifndef COGBEAM_RNG_H_
#define COGBEAM_RNG_H_

#include <array>
#include <cstdint>
#include <limits>

#include "cogbeam/matrix_core.h"

namespace cogbeam {

// xoshiro256** seeded through splitmix64. Every random quantity in a scenario
// is drawn from its own stream, keyed by (seed, run, tag, a, b), so e.g. the
// channel H(k,j) does not depend on how many links precede it. Gaussian and
// uniform variates are produced here rather than by <random> distributions so
// that output is identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1).
  double Uniform();
  double Uniform(double lo, double hi);
  // Standard normal (Box-Muller, both outputs used).
  double Normal();
  // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex ComplexNormal(double variance);

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class StreamTag : std::uint32_t {
  kCrossDistance = 1,
  kPuDistance = 2,
  kCrChannel = 3,
  kPuChannel = 4,
  kUncertainty = 5,
  kTest = 99,
};

std::uint64_t SplitMix64(std::uint64_t& state);

// Derives an independent stream from the experiment seed, Monte Carlo run
// index, purpose tag and up to two entity indices.
Rng MakeStream(std::uint64_t seed, std::uint64_t run, StreamTag tag, std::uint32_t a = 0,
               std::uint32_t b = 0);

ComplexMatrix RandomComplexGaussian(Rng& rng, Index rows, Index cols, double variance);

}  // namespace cogbeam

#endif  // COGBEAM_RNG_H_
