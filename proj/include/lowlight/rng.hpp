#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace lowlight {

// Mixes a master seed with a short index path (image index, substream, ...)
// into a single 64-bit stream seed.
uint64_t mix_seed(uint64_t master, std::span<const uint64_t> path);

// Deterministic stream RNG. A stream is addressed by (master seed, path);
// identical addresses produce identical draw sequences everywhere. All
// sampling transforms are implemented here instead of relying on <random>
// distributions, whose output is implementation-defined.
class StreamRng {
 public:
  explicit StreamRng(uint64_t master) : StreamRng(master, {}) {}
  StreamRng(uint64_t master, std::initializer_list<uint64_t> path);

  uint64_t next_u64() { return eng_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n), n >= 1.
  uint32_t uniform_index(uint32_t n);

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();
  double normal(double mean, double stddev);

  // Rejection sampling from N(mean, stddev^2) restricted to [lo, hi].
  double truncated_normal(double mean, double stddev, double lo, double hi);

  // Knuth's product method for small means, Hormann's PTRS otherwise.
  long long poisson(double lambda);

  // Flat Dirichlet over the 3-simplex (four nonnegative weights summing to 1).
  std::array<double, 4> dirichlet4();

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace lowlight
