#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace assoc {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Seed of an independent stream identified by `tag` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Portable random stream. std::mt19937_64 output is fixed by the standard;
// the distributions below are implemented here because the standard library
// distributions differ between vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via the Box-Muller transform (both outputs used).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), ascending. Partial Fisher-Yates.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace assoc
