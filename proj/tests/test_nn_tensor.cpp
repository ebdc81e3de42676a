#include <doctest.h>

#include <vector>

#include "scanleak/nn/tensor.hpp"
#include "scanleak/rng.hpp"

using namespace scanleak;
using nn::Tensor;

namespace {

// Naive reference products for the three gemm variants.
std::vector<double> naive_nn(std::size_t m, std::size_t n, std::size_t k,
                             const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j)
        c[i * n + j] += a[i * k + p] * b[p * n + j];
  return c;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_SUITE("nn_tensor") {

TEST_CASE("shape bookkeeping") {
  Tensor t({2, 3, 4});
  CHECK(t.ndim() == 3);
  CHECK(t.numel() == 24);
  CHECK(t.dim(1) == 3);
  CHECK(t.data.size() == 24);
  for (double v : t.data) CHECK(v == 0.0);

  t.at(1, 2, 3) = 7.0;
  CHECK(t.data[23] == 7.0);
  t.fill(1.5);
  CHECK(t.at(0, 0, 0) == 1.5);

  Tensor m({3, 5});
  m.at(2, 4) = -1.0;
  CHECK(m.data[14] == -1.0);
}

TEST_CASE("reshape preserves data and rejects bad sizes") {
  Tensor t({2, 6});
  for (std::size_t i = 0; i < 12; ++i) t[i] = static_cast<double>(i);
  const Tensor r = t.reshaped({3, 4});
  CHECK(r.shape == std::vector<std::size_t>{3, 4});
  CHECK(r.data == t.data);
  CHECK_THROWS_AS(t.reshaped({5, 5}), DomainError);
}

TEST_CASE("gemm_nn matches the naive triple loop") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(17);
    const std::size_t n = 1 + rng.uniform_index(17);
    const std::size_t k = 1 + rng.uniform_index(17);
    const auto a = random_vec(m * k, rng);
    const auto b = random_vec(k * n, rng);
    std::vector<double> c(m * n, 0.0);
    nn::gemm_nn(m, n, k, a.data(), b.data(), c.data());
    const auto want = naive_nn(m, n, k, a, b);
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(c[i] == doctest::Approx(want[i]).epsilon(1e-10));
  }
}

TEST_CASE("gemm_nt multiplies by the transpose of B") {
  Rng rng(22);
  const std::size_t m = 5, n = 7, k = 3;
  const auto a = random_vec(m * k, rng);
  const auto bt = random_vec(n * k, rng);  // B^T stored {n, k}
  // Reference: transpose bt into {k, n} then use the naive product.
  std::vector<double> b(k * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) b[j * n + i] = bt[i * k + j];
  std::vector<double> c(m * n, 0.0);
  nn::gemm_nt(m, n, k, a.data(), bt.data(), c.data());
  const auto want = naive_nn(m, n, k, a, b);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(c[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("gemm_tn multiplies by the transpose of A") {
  Rng rng(23);
  const std::size_t m = 4, n = 6, k = 5;
  const auto at = random_vec(k * m, rng);  // A^T stored {k, m}
  const auto b = random_vec(k * n, rng);
  std::vector<double> a(m * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < m; ++j) a[j * k + i] = at[i * m + j];
  std::vector<double> c(m * n, 0.0);
  nn::gemm_tn(m, n, k, at.data(), b.data(), c.data());
  const auto want = naive_nn(m, n, k, a, b);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(c[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("gemm beta accumulates into the output") {
  Rng rng(24);
  const std::size_t m = 3, n = 3, k = 3;
  const auto a = random_vec(m * k, rng);
  const auto b = random_vec(k * n, rng);
  std::vector<double> c(m * n, 2.0);
  nn::gemm_nn(m, n, k, a.data(), b.data(), c.data(), 1.0);
  const auto want = naive_nn(m, n, k, a, b);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(c[i] == doctest::Approx(want[i] + 2.0).epsilon(1e-10));
}

}  // TEST_SUITE
