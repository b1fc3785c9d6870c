#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fdacov {

// One splitmix64 step; advances the state and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

// Mixes up to three integers into a well-spread engine seed so that
// (seed, replicate, curve) triples give independent streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Deterministic random stream. mt19937_64 is pinned by the standard and the
// uniform/normal transforms are written out explicitly, so identical seeds
// give identical draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1).
  double uniform();
  // Standard normal via Box-Muller.
  double normal();
  // Uniform integer on [0, n), unbiased.
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates shuffle driven by Rng.
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng);

}  // namespace fdacov
