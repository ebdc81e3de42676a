#pragma once

#include <cstddef>
#include <vector>

#include "scanleak/errors.hpp"

namespace scanleak::nn {

// Dense row-major tensor of doubles. Shapes are explicit; data is flat.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  std::size_t ndim() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t numel() const;

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  // 2-D and 3-D element access, row-major.
  double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  void fill(double v);
  Tensor reshaped(std::vector<std::size_t> s) const;  // same numel, copies
};

// C[m x n] = A[m x k] * B[k x n] + beta * C. Plain blocked loops; parallel
// rows are computed independently so results do not depend on thread count.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, double beta = 0.0);
// C[m x n] = A[m x k] * B[n x k]^T + beta * C
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, double beta = 0.0);
// C[m x n] = A[k x m]^T * B[k x n] + beta * C
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, double beta = 0.0);

}  // namespace scanleak::nn
