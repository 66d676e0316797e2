#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace evovox {

// splitmix64 finalizer. Used for seed derivation and as the counter-based
// generator behind controller phase offsets.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Combine a seed with a stream tag so independent concerns (population init,
// GA draws, controller scenarios) never share a sequence.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// Seeded random source with portable value derivation: doubles are built from
// raw engine words, not from std distributions, so a (seed, call sequence)
// pair produces the same values on every platform.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n = 0 is a contract violation.
  std::size_t uniform_index(std::size_t n);

  bool chance(double p) { return uniform() < p; }

  // Marsaglia polar method; caches the spare deviate.
  double gaussian(double mean, double sigma);

  RandomSource derive(std::uint64_t stream) const {
    return RandomSource(derive_seed(seed_, stream));
  }

  std::uint64_t seed() const { return seed_; }

  std::string save_state() const;
  void restore_state(const std::string& state);

 private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace evovox
