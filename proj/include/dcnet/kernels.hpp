// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Inner-loop kernels with a scalar reference and SIMD variants selected at
// runtime. Every variant of a kernel computes the same function; the GEMM
// kernels accumulate in fp64 and round once when storing to C.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace dcnet::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

/// C[M×N] = A[M×K]·B[K×N] (or C += when accumulate). Row-major with leading dims.
using GemmNNFn = void (*)(std::int64_t m, std::int64_t n, std::int64_t k, const float* a,
                          std::int64_t lda, const float* b, std::int64_t ldb, float* c,
                          std::int64_t ldc, bool accumulate);
/// C[M×N] = A[M×K]·B[N×K]^T (or C +=).
using GemmNTFn = GemmNNFn;
/// y += alpha·x
using AxpyFn = void (*)(std::int64_t n, float alpha, const float* x, float* y);
/// y = max(x, 0)
using ReluFn = void (*)(std::int64_t n, const float* x, float* y);

struct KernelTable {
  Isa isa;
  GemmNNFn gemm_nn;
  GemmNTFn gemm_nt;
  AxpyFn axpy;
  ReluFn relu;
};

namespace scalar {
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate);
void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate);
void axpy(std::int64_t n, float alpha, const float* x, float* y);
void relu(std::int64_t n, const float* x, float* y);
}  // namespace scalar

namespace avx2 {
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate);
void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate);
void axpy(std::int64_t n, float alpha, const float* x, float* y);
void relu(std::int64_t n, const float* x, float* y);
}  // namespace avx2

namespace neon {
void gemm_nn(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate);
void gemm_nt(std::int64_t m, std::int64_t n, std::int64_t k, const float* a, std::int64_t lda,
             const float* b, std::int64_t ldb, float* c, std::int64_t ldc, bool accumulate);
void axpy(std::int64_t n, float alpha, const float* x, float* y);
void relu(std::int64_t n, const float* x, float* y);
}  // namespace neon

/// True if the variant was compiled in and the running CPU supports it.
bool available(Isa isa);
std::vector<Isa> available_isas();
const KernelTable& table(Isa isa);

/// Kernel table used by tensor ops. Defaults to the best available ISA;
/// DCNET_KERNELS=scalar|avx2|neon in the environment overrides.
const KernelTable& active();
void set_active(Isa isa);

/// Restores the previously active ISA on scope exit.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

}  // namespace dcnet::kernels
