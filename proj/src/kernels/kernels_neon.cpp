// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// AArch64 variant. Float lanes are widened to float64x2 so accumulation
// matches the fp64 reference order.

#include <arm_neon.h>

#include <algorithm>
#include <vector>

#include "dcnet/kernels.hpp"

namespace dcnet::kernels::neon {

void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate) {
  const std::int64_t n4 = n - n % 4;
  for (std::int64_t i = 0; i < m; ++i) {
    const float* arow = a + i * lda;
    float* crow = c + i * ldc;
    for (std::int64_t j = 0; j < n4; j += 4) {
      float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
      if (accumulate) {
        const float32x4_t cv = vld1q_f32(crow + j);
        lo = vcvt_f64_f32(vget_low_f32(cv));
        hi = vcvt_high_f64_f32(cv);
      }
      for (std::int64_t p = 0; p < k; ++p) {
        const float64x2_t av = vdupq_n_f64(static_cast<double>(arow[p]));
        const float32x4_t bv = vld1q_f32(b + p * ldb + j);
        lo = vfmaq_f64(lo, av, vcvt_f64_f32(vget_low_f32(bv)));
        hi = vfmaq_f64(hi, av, vcvt_high_f64_f32(bv));
      }
      vst1q_f32(crow + j, vcvt_high_f32_f64(vcvt_f32_f64(lo), hi));
    }
    for (std::int64_t j = n4; j < n; ++j) {
      double acc = accumulate ? static_cast<double>(crow[j]) : 0.0;
      for (std::int64_t p = 0; p < k; ++p) acc += static_cast<double>(arow[p]) * b[p * ldb + j];
      crow[j] = static_cast<float>(acc);
    }
  }
}

void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate) {
  const std::int64_t k4 = k - k % 4;
  for (std::int64_t i = 0; i < m; ++i) {
    const float* arow = a + i * lda;
    for (std::int64_t j = 0; j < n; ++j) {
      const float* brow = b + j * ldb;
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::int64_t p = 0; p < k4; p += 4) {
        const float32x4_t av = vld1q_f32(arow + p);
        const float32x4_t bv = vld1q_f32(brow + p);
        acc = vfmaq_f64(acc, vcvt_f64_f32(vget_low_f32(av)), vcvt_f64_f32(vget_low_f32(bv)));
        acc = vfmaq_f64(acc, vcvt_high_f64_f32(av), vcvt_high_f64_f32(bv));
      }
      double sum = vaddvq_f64(acc);
      for (std::int64_t p = k4; p < k; ++p) sum += static_cast<double>(arow[p]) * brow[p];
      float& out = c[i * ldc + j];
      out = accumulate ? static_cast<float>(static_cast<double>(out) + sum) : static_cast<float>(sum);
    }
  }
}

void axpy(std::int64_t n, float alpha, const float* x, float* y) {
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t prod = vmulq_n_f32(vld1q_f32(x + i), alpha);
    vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu(std::int64_t n, const float* x, float* y) {
  const float32x4_t zero = vdupq_n_f32(0.0f);
  std::int64_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmaxq_f32(vld1q_f32(x + i), zero));
  for (; i < n; ++i) y[i] = std::max(x[i], 0.0f);
}

}  // namespace dcnet::kernels::neon
