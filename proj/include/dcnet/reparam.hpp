// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Parallel-encoder merging and the merged-vs-unmerged benchmark.
//
// Copy rules from the dual form to the merged form: every encoder tensor
// "penc.X" is the concatenation along dim 0 of "enc1.X" and "enc2.X". For the
// input conv (shared image input) that is a plain output-channel concat; every
// deeper conv runs with groups = 2, so the concat is the block-diagonal weight
// stored densely. Batchnorm vectors and side-head biases concatenate the same
// way; decoder tensors are copied unchanged.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcnet/dcnet.hpp"

namespace dcnet {

/// Throws CannotMerge if the graph is already merged or the encoders are not
/// shape-isomorphic.
ModuleGraph merge_dual_encoder(const ModuleGraph& dual);

struct EquivalenceReport {
  std::vector<double> stage_max_abs;  // per encoder stage, merged vs concat of dual
  double side_max_abs = 0.0;          // over all 2E + D side maps
  double max_abs() const;
};

/// Runs both graphs in eval mode on `images` and compares.
EquivalenceReport compare_forwards(ModuleGraph& dual, ModuleGraph& merged, const Tensor& images,
                                   bool merged_convs = false);

/// Largest absolute difference over all side maps of two forwards.
double side_map_max_abs(const ForwardOutputs& a, const ForwardOutputs& b);

struct BenchRow {
  std::string variant;
  bool encoder_merged = false;
  bool convs_merged = false;
  double median_ms = 0.0;
  std::uint64_t gemm_calls = 0;
  std::uint64_t unfold_calls = 0;
  double max_abs_diff = 0.0;  // vs the unmerged dual forward
};

struct BenchOptions {
  int repeats = 5;
  double tol = 1e-4;
};

/// Four variants (encoder merged × ResASPP² merged). Equivalence of every
/// variant against the unmerged forward is checked before any timing; a
/// failure throws EquivalenceFailure.
std::vector<BenchRow> bench(ModuleGraph& dual, ModuleGraph& merged, const Tensor& images,
                            const BenchOptions& opts = {});

std::string bench_table(const std::vector<BenchRow>& rows);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace dcnet
