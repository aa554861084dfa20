#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ldm {

// Portable pseudo-random stream: splitmix64 seeding feeding xorshift64*.
// Every draw is defined by integer arithmetic only, so a given seed yields
// the same sequence on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double unit();

 private:
  std::uint64_t state_;
};

/// Fisher-Yates permutation of 0..n-1 drawn from `rng`.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace ldm
