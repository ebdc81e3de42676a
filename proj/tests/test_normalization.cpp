#include <doctest.h>

#include <cmath>
#include <vector>

#include "scanleak/normalization.hpp"
#include "scanleak/rng.hpp"

using namespace scanleak;

namespace {

// Independent resampler: exact rational sample positions evaluated in long
// double. Output index i sits at source position i*(n-1)/(m-1).
std::vector<double> oracle_resample(const std::vector<double>& s,
                                    std::size_t m) {
  const std::size_t n = s.size();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const long double pos = static_cast<long double>(i) *
                            static_cast<long double>(n - 1) /
                            static_cast<long double>(m - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const long double frac = pos - static_cast<long double>(lo);
    out[i] = static_cast<double>((1.0L - frac) * s[lo] + frac * s[hi]);
  }
  return out;
}

}  // namespace

TEST_SUITE("normalization") {

TEST_CASE("resample matches the rational-position oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(400);
    const std::size_t m = 2 + rng.uniform_index(400);
    std::vector<double> s(n);
    for (double& v : s) v = rng.uniform(-5.0, 5.0);
    const auto got = resample(s, m);
    const auto want = oracle_resample(s, m);
    REQUIRE(got.size() == m);
    for (std::size_t i = 0; i < m; ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("resample maps endpoints to endpoints") {
  Rng rng(12);
  std::vector<double> s(37);
  for (double& v : s) v = rng.uniform(-1.0, 1.0);
  for (std::size_t m : {2u, 5u, 37u, 36u, 38u, 500u}) {
    const auto r = resample(s, m);
    CHECK(r.front() == s.front());
    CHECK(r.back() == s.back());
  }
}

TEST_CASE("resample to own length is the identity") {
  std::vector<double> s{3.0, -1.0, 4.0, -1.5, 9.2};
  CHECK(resample(s, 5) == s);
}

TEST_CASE("resample of a linear ramp stays linear") {
  // Linear interpolation reproduces affine signals exactly up to rounding.
  std::vector<double> s(11);
  for (std::size_t i = 0; i < 11; ++i) s[i] = 2.0 * static_cast<double>(i) - 3.0;
  const auto r = resample(s, 101);
  for (std::size_t i = 0; i < 101; ++i) {
    const double t = static_cast<double>(i) / 100.0 * 10.0;
    CHECK(r[i] == doctest::Approx(2.0 * t - 3.0).epsilon(1e-12));
  }
}

TEST_CASE("resample rejects degenerate inputs") {
  CHECK_THROWS_AS(resample(std::vector<double>{}, 10), DomainError);
  CHECK_THROWS_AS(resample(std::vector<double>{1.0}, 10), DomainError);
  CHECK_THROWS_AS(resample(std::vector<double>{1.0, 2.0}, 0), DomainError);
  CHECK_THROWS_AS(resample(std::vector<double>{1.0, 2.0}, 1), DomainError);
  CHECK_NOTHROW(resample(std::vector<double>{1.0, 2.0}, 2));
}

TEST_CASE("zscore produces exact zero mean and unit variance") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(64 + rng.uniform_index(200));
    for (double& v : s) v = rng.uniform(-10.0, 10.0);
    const auto z = zscore(s);
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(z.size());
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("zscore rejects constant signals") {
  CHECK_THROWS_AS(zscore(std::vector<double>(100, 4.2)),
                  DegenerateSignalError);
  std::vector<double> nearly(100, 1.0);
  nearly[50] += 1e-13;  // variance under eps^2 territory
  CHECK_THROWS_AS(zscore(nearly), DegenerateSignalError);
}

TEST_CASE("normalize_signal is invariant to positive affine maps") {
  Rng rng(14);
  std::vector<float> s(300);
  for (float& v : s) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const auto base = normalize_signal(s, 167);
  std::vector<float> scaled(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    scaled[i] = 3.5f * s[i] + 0.75f;
  const auto other = normalize_signal(scaled, 167);
  REQUIRE(base.size() == other.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i] == doctest::Approx(other[i]).epsilon(1e-5));
}

TEST_CASE("normalize_signal output length is exact") {
  std::vector<double> s(500);
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = std::sin(0.05 * static_cast<double>(i));
  for (std::size_t len : {8u, 100u, 167u, 500u, 1234u})
    CHECK(normalize_signal(s, len).size() == len);
}

TEST_CASE("normalize_signal composes resample then zscore") {
  std::vector<double> s(97);
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = std::cos(0.21 * static_cast<double>(i)) + 0.3;
  const auto direct = normalize_signal(s, 167);
  const auto manual = zscore(resample(s, 167));
  REQUIRE(direct.size() == manual.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(direct[i] == manual[i]);
}

}  // TEST_SUITE
