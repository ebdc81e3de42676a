#include "scanleak/rng.hpp"

#include <cmath>
#include <numbers>

namespace scanleak {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::uint64_t index) {
  // FNV-1a over the stage name, then splitmix finalization rounds mixing in
  // master and index. Collisions between distinct (stage, index) pairs are
  // as unlikely as 64-bit hash collisions.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::uint64_t state = h;
  state ^= splitmix64(state) ^ master;
  state ^= splitmix64(state) ^ index;
  return splitmix64(state);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u is kept away from 0 so the log stays finite.
  double u = 0.0;
  do {
    u = uniform();
  } while (u <= 0x1.0p-64);
  double v = uniform();
  double r = std::sqrt(-2.0 * std::log(u));
  double a = 2.0 * std::numbers::pi * v;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  shuffle(p);
  return p;
}

}  // namespace scanleak
