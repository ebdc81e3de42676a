#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace scanleak {

// Child seed for a pipeline stage. Derivation is a stable hash of
// (master, stage, index) so independent stages never share a stream and a
// whole run is reproducible from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::uint64_t index = 0);

// Deterministic generator used everywhere randomness is needed. mt19937_64
// output is pinned by the standard; the distributions below are hand-rolled
// so that sampled values are bit-stable across platforms and compilers
// (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is below 2^-53 for any n that
  // fits in a size_t and does not matter for simulation work.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  int uniform_int(int lo, int hi_inclusive) {
    return lo + static_cast<int>(
                    uniform_index(static_cast<std::size_t>(hi_inclusive - lo + 1)));
  }

  // Standard normal via Box-Muller; one spare value is cached.
  double normal();

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace scanleak
