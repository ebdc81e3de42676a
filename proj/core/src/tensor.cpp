#include "scanleak/nn/tensor.hpp"

#include "scanleak/errors.hpp"

namespace scanleak::nn {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  data.assign(shape_product(shape), 0.0);
}

std::size_t Tensor::numel() const { return data.size(); }

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

Tensor Tensor::reshaped(std::vector<std::size_t> s) const {
  if (shape_product(s) != data.size())
    throw DomainError("reshaped: element count mismatch");
  Tensor out;
  out.shape = std::move(s);
  out.data = data;
  return out;
}

// Each kernel parallelizes over rows of C only: every C element is written by
// exactly one thread, so the result is independent of thread count/schedule.

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, double beta) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * n * k > 32768)
#endif
  for (std::ptrdiff_t is = 0; is < static_cast<std::ptrdiff_t>(m); ++is) {
    const auto i = static_cast<std::size_t>(is);
    double* crow = c + i * n;
    if (beta == 0.0) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    } else if (beta != 1.0) {
      for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
    }
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, double beta) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * n * k > 32768)
#endif
  for (std::ptrdiff_t is = 0; is < static_cast<std::ptrdiff_t>(m); ++is) {
    const auto i = static_cast<std::size_t>(is);
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc + (beta == 0.0 ? 0.0 : beta * crow[j]);
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, double beta) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * n * k > 32768)
#endif
  for (std::ptrdiff_t is = 0; is < static_cast<std::ptrdiff_t>(m); ++is) {
    const auto i = static_cast<std::size_t>(is);
    double* crow = c + i * n;
    if (beta == 0.0) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    } else if (beta != 1.0) {
      for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[p * m + i];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace scanleak::nn
