#include "cogbeam/rng.h"

#include <cmath>
#include <numbers>

namespace cogbeam {

namespace {

inline std::uint64_t Rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t SplitMix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = SplitMix64(state);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  return result;
}

double Rng::Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

double Rng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - Uniform();  // (0, 1]
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

Complex Rng::ComplexNormal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = Normal();
  const double im = Normal();
  return {s * re, s * im};
}

Rng MakeStream(std::uint64_t seed, std::uint64_t run, StreamTag tag, std::uint32_t a,
               std::uint32_t b) {
  std::uint64_t state = seed;
  std::uint64_t key = SplitMix64(state);
  state = key ^ run;
  key = SplitMix64(state);
  state = key ^ static_cast<std::uint64_t>(tag);
  key = SplitMix64(state);
  state = key ^ ((static_cast<std::uint64_t>(a) << 32) | b);
  key = SplitMix64(state);
  return Rng(key);
}

ComplexMatrix RandomComplexGaussian(Rng& rng, Index rows, Index cols, double variance) {
  ComplexMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.ComplexNormal(variance);
  }
  return m;
}

}  // namespace cogbeam
