#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mcm {

// Seedable 64-bit generator used everywhere randomness is consumed.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The real-valued transforms are implemented here instead of using
// <random> distributions (which are implementation-defined), so a given seed
// yields the same stream on every conforming toolchain:
//   uniform()  = (next() >> 11) * 2^-53            in [0, 1)
//   normal()   = Box-Muller on (1 - u1, u2), cosine branch only, no caching
//   bernoulli  = uniform() < p
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64+boxmuller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Folds a sequence of words into one seed: h = mix64(h ^ mix64(word + k)).
// Order-sensitive, so (sim=1, split=2) and (sim=2, split=1) differ.
std::uint64_t combine_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words);

}  // namespace mcm
