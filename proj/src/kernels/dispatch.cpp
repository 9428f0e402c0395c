// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "dcnet/errors.hpp"
#include "dcnet/kernels.hpp"

namespace dcnet::kernels {

namespace {

constexpr KernelTable kScalarTable{Isa::kScalar, scalar::gemm_nn, scalar::gemm_nt, scalar::axpy,
                                   scalar::relu};
#if defined(DCNET_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::kAvx2, avx2::gemm_nn, avx2::gemm_nt, avx2::axpy, avx2::relu};
#endif
#if defined(DCNET_HAVE_NEON)
constexpr KernelTable kNeonTable{Isa::kNeon, neon::gemm_nn, neon::gemm_nt, neon::axpy, neon::relu};
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(DCNET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(DCNET_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("DCNET_KERNELS")) {
    const std::string want(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon})
      if (want == isa_name(isa) && available(isa)) return &table(isa);
  }
  if (available(Isa::kAvx2)) return &table(Isa::kAvx2);
  if (available(Isa::kNeon)) return &table(Isa::kNeon);
  return &kScalarTable;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool available(Isa isa) { return cpu_supports(isa); }

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon})
    if (available(isa)) out.push_back(isa);
  return out;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw InvalidArgument("kernel variant not available: " + std::string(isa_name(isa)));
  switch (isa) {
#if defined(DCNET_HAVE_AVX2)
    case Isa::kAvx2: return kAvx2Table;
#endif
#if defined(DCNET_HAVE_NEON)
    case Isa::kNeon: return kNeonTable;
#endif
    default: return kScalarTable;
  }
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { active_slot().store(&table(isa), std::memory_order_release); }

ScopedIsa::ScopedIsa(Isa isa) : previous_(active().isa) { set_active(isa); }
ScopedIsa::~ScopedIsa() { set_active(previous_); }

}  // namespace dcnet::kernels
