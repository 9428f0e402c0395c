// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <vector>

#include "dcnet/kernels.hpp"

namespace dcnet::kernels::scalar {

// Reference order: each C element accumulates k = 0..K-1 in fp64, starting
// from C (accumulate) or 0. Float products are exact in fp64, so any variant
// that keeps this order per element is bit-identical.
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate) {
  std::vector<double> row(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < m; ++i) {
    float* crow = c + i * ldc;
    for (std::int64_t j = 0; j < n; ++j) row[j] = accumulate ? static_cast<double>(crow[j]) : 0.0;
    for (std::int64_t p = 0; p < k; ++p) {
      const double av = a[i * lda + p];
      const float* brow = b + p * ldb;
      for (std::int64_t j = 0; j < n; ++j) row[j] += av * static_cast<double>(brow[j]);
    }
    for (std::int64_t j = 0; j < n; ++j) crow[j] = static_cast<float>(row[j]);
  }
}

void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate) {
  for (std::int64_t i = 0; i < m; ++i) {
    const float* arow = a + i * lda;
    for (std::int64_t j = 0; j < n; ++j) {
      const float* brow = b + j * ldb;
      double acc = 0.0;
      for (std::int64_t p = 0; p < k; ++p) acc += static_cast<double>(arow[p]) * brow[p];
      float& out = c[i * ldc + j];
      out = accumulate ? static_cast<float>(static_cast<double>(out) + acc) : static_cast<float>(acc);
    }
  }
}

void axpy(std::int64_t n, float alpha, const float* x, float* y) {
  for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu(std::int64_t n, const float* x, float* y) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = std::max(x[i], 0.0f);
}

}  // namespace dcnet::kernels::scalar
