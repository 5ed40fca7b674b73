#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace xct {

// splitmix64: used both as a seed scrambler and to derive independent
// substream seeds from (base_seed, stream ids). Reference constants from
// Steele et al.'s SplittableRandom.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

// Deterministic substream seed from a base seed plus up to three stream ids
// (e.g. frame index, purpose tag). Distinct ids give decorrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t id0, std::uint64_t id1 = 0,
                          std::uint64_t id2 = 0);

// All randomness in the project flows through this engine wrapper so the
// bit-level sequence is pinned by us, not by library implementation details
// (std::uniform_real_distribution and std::normal_distribution are not
// portable across standard libraries; std::mt19937_64's raw output is).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(SplitMix64(seed).next()) {}

  std::uint64_t bits() { return eng_(); }

  // Uniform in [0, 1): 53-bit mantissa construction.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (pairwise, cached spare).
  double normal();

  // Poisson with the given mean. std::poisson_distribution is deterministic
  // for a fixed libstdc++, which the reproducibility contract allows
  // (same-binary bitwise equality).
  std::int64_t poisson(double mean) {
    std::poisson_distribution<std::int64_t> d(mean);
    return d(eng_);
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace xct
