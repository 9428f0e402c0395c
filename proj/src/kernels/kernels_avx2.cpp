// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma -ffp-contract=off; only reached through the
// dispatch table after a CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "dcnet/kernels.hpp"

namespace dcnet::kernels::avx2 {

namespace {

inline __m256d lo_pd(__m256 v) { return _mm256_cvtps_pd(_mm256_castps256_ps128(v)); }
inline __m256d hi_pd(__m256 v) { return _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)); }

inline __m256 to_ps(__m256d lo, __m256d hi) {
  return _mm256_insertf128_ps(_mm256_castps128_ps256(_mm256_cvtpd_ps(lo)), _mm256_cvtpd_ps(hi), 1);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Scalar column tail, same per-element order as the reference.
void nn_tail(std::int64_t i0, std::int64_t i1, std::int64_t j0, std::int64_t n, std::int64_t k,
             const double* ad, const float* b, std::int64_t ldb, float* c, std::int64_t ldc,
             bool accumulate) {
  for (std::int64_t i = i0; i < i1; ++i) {
    for (std::int64_t j = j0; j < n; ++j) {
      double acc = accumulate ? static_cast<double>(c[i * ldc + j]) : 0.0;
      for (std::int64_t p = 0; p < k; ++p) acc += ad[i * k + p] * static_cast<double>(b[p * ldb + j]);
      c[i * ldc + j] = static_cast<float>(acc);
    }
  }
}

}  // namespace

void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate) {
  if (m <= 0 || n <= 0) return;
  // A is small (weights); widen once so the inner loop broadcasts straight from memory.
  std::vector<double> ad(static_cast<std::size_t>(m * k));
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t p = 0; p < k; ++p) ad[i * k + p] = a[i * lda + p];

  const std::int64_t n8 = n - n % 8;
  const std::int64_t m4 = m - m % 4;
  for (std::int64_t j = 0; j < n8; j += 8) {
    std::int64_t i = 0;
    for (; i < m4; i += 4) {
      __m256d acc[4][2];
      for (int r = 0; r < 4; ++r) {
        if (accumulate) {
          const __m256 cv = _mm256_loadu_ps(c + (i + r) * ldc + j);
          acc[r][0] = lo_pd(cv);
          acc[r][1] = hi_pd(cv);
        } else {
          acc[r][0] = _mm256_setzero_pd();
          acc[r][1] = _mm256_setzero_pd();
        }
      }
      const double* a0 = ad.data() + i * k;
      for (std::int64_t p = 0; p < k; ++p) {
        const __m256 bv = _mm256_loadu_ps(b + p * ldb + j);
        const __m256d blo = lo_pd(bv);
        const __m256d bhi = hi_pd(bv);
        for (int r = 0; r < 4; ++r) {
          const __m256d av = _mm256_broadcast_sd(a0 + r * k + p);
          acc[r][0] = _mm256_fmadd_pd(av, blo, acc[r][0]);
          acc[r][1] = _mm256_fmadd_pd(av, bhi, acc[r][1]);
        }
      }
      for (int r = 0; r < 4; ++r) _mm256_storeu_ps(c + (i + r) * ldc + j, to_ps(acc[r][0], acc[r][1]));
    }
    for (; i < m; ++i) {
      __m256d lo = _mm256_setzero_pd();
      __m256d hi = _mm256_setzero_pd();
      if (accumulate) {
        const __m256 cv = _mm256_loadu_ps(c + i * ldc + j);
        lo = lo_pd(cv);
        hi = hi_pd(cv);
      }
      const double* arow = ad.data() + i * k;
      for (std::int64_t p = 0; p < k; ++p) {
        const __m256 bv = _mm256_loadu_ps(b + p * ldb + j);
        const __m256d av = _mm256_broadcast_sd(arow + p);
        lo = _mm256_fmadd_pd(av, lo_pd(bv), lo);
        hi = _mm256_fmadd_pd(av, hi_pd(bv), hi);
      }
      _mm256_storeu_ps(c + i * ldc + j, to_ps(lo, hi));
    }
  }
  if (n8 < n) nn_tail(0, m, n8, n, k, ad.data(), b, ldb, c, ldc, accumulate);
}

void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate) {
  const std::int64_t k8 = k - k % 8;
  auto finish = [&](std::int64_t i, std::int64_t j, double acc) {
    const float* arow = a + i * lda;
    const float* brow = b + j * ldb;
    for (std::int64_t p = k8; p < k; ++p) acc += static_cast<double>(arow[p]) * brow[p];
    float& out = c[i * ldc + j];
    out = accumulate ? static_cast<float>(static_cast<double>(out) + acc) : static_cast<float>(acc);
  };

  const std::int64_t m4 = m - m % 4;
  const std::int64_t n2 = n - n % 2;
  std::int64_t i = 0;
  for (; i < m4; i += 4) {
    std::int64_t j = 0;
    for (; j < n2; j += 2) {
      __m256d acc[4][2];
      for (auto& row : acc) row[0] = row[1] = _mm256_setzero_pd();
      for (std::int64_t p = 0; p < k8; p += 8) {
        const __m256 b0 = _mm256_loadu_ps(b + j * ldb + p);
        const __m256 b1 = _mm256_loadu_ps(b + (j + 1) * ldb + p);
        const __m256d b0l = lo_pd(b0), b0h = hi_pd(b0), b1l = lo_pd(b1), b1h = hi_pd(b1);
        for (int r = 0; r < 4; ++r) {
          const __m256 av = _mm256_loadu_ps(a + (i + r) * lda + p);
          const __m256d al = lo_pd(av), ah = hi_pd(av);
          acc[r][0] = _mm256_fmadd_pd(al, b0l, acc[r][0]);
          acc[r][0] = _mm256_fmadd_pd(ah, b0h, acc[r][0]);
          acc[r][1] = _mm256_fmadd_pd(al, b1l, acc[r][1]);
          acc[r][1] = _mm256_fmadd_pd(ah, b1h, acc[r][1]);
        }
      }
      for (int r = 0; r < 4; ++r) {
        finish(i + r, j, hsum(acc[r][0]));
        finish(i + r, j + 1, hsum(acc[r][1]));
      }
    }
    for (; j < n; ++j) {
      for (int r = 0; r < 4; ++r) {
        __m256d acc = _mm256_setzero_pd();
        for (std::int64_t p = 0; p < k8; p += 8) {
          const __m256 av = _mm256_loadu_ps(a + (i + r) * lda + p);
          const __m256 bv = _mm256_loadu_ps(b + j * ldb + p);
          acc = _mm256_fmadd_pd(lo_pd(av), lo_pd(bv), acc);
          acc = _mm256_fmadd_pd(hi_pd(av), hi_pd(bv), acc);
        }
        finish(i + r, j, hsum(acc));
      }
    }
  }
  for (; i < m; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      __m256d acc = _mm256_setzero_pd();
      for (std::int64_t p = 0; p < k8; p += 8) {
        const __m256 av = _mm256_loadu_ps(a + i * lda + p);
        const __m256 bv = _mm256_loadu_ps(b + j * ldb + p);
        acc = _mm256_fmadd_pd(lo_pd(av), lo_pd(bv), acc);
        acc = _mm256_fmadd_pd(hi_pd(av), hi_pd(bv), acc);
      }
      finish(i, j, hsum(acc));
    }
  }
}

void axpy(std::int64_t n, float alpha, const float* x, float* y) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    // mul then add (no FMA) to round like the scalar reference
    const __m256 prod = _mm256_mul_ps(av, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu(std::int64_t n, const float* x, float* y) {
  const __m256 zero = _mm256_setzero_ps();
  std::int64_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) y[i] = std::max(x[i], 0.0f);
}

}  // namespace dcnet::kernels::avx2
