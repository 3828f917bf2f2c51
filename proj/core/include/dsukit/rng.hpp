#pragma once

// Platform-independent pseudo-random utilities.
//
// Every random decision in the toolkit goes through Rng so that results are
// bit-identical across standard libraries. The engine is std::mt19937_64,
// whose output sequence is fixed by the C++ standard; the distributions
// (uniform real, bounded integer, normal) are implemented here because the
// std:: distributions are implementation-defined.
//
//   uniform01   : (engine() >> 11) * 2^-53                       in [0, 1)
//   below(n)    : rejection sampling on the top of the 64-bit range
//   normal      : Box-Muller, u1 in (0, 1], pairs cached
//   seeds       : keys are folded into a 64-bit seed with SplitMix64 and
//                 FNV-1a (for string keys)

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace dsukit {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

// Derives an independent stream seed from a parent seed and a key.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// First k entries of a uniform random permutation of [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

}  // namespace dsukit
