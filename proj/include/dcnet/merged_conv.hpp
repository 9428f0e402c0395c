// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Merged convolution: K parallel convolutions with equal kernel size and
// output size run as one batched GEMM. Branches that read the same input
// with the same patch geometry share a single unfold.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dcnet/ops.hpp"
#include "dcnet/tensor.hpp"

namespace dcnet {

struct ConvBranch {
  ConvSpec spec;
  Tensor weight;
  std::optional<Tensor> bias;
  /// Index into the input list passed to execute_merged.
  std::size_t input = 0;
  /// Set on branches handed out by an existing plan; such branches are not mergeable again.
  bool from_plan = false;
};

/// Snapshot of GEMM/unfold invocations attributed to one pass.
struct GemmCounter {
  std::uint64_t gemm_calls = 0;
  std::uint64_t unfold_calls = 0;
};

/// Counts GEMM and unfold invocations issued on this thread while alive.
class GemmCounterScope {
 public:
  GemmCounterScope() : start_(op_counters()) {}
  GemmCounter read() const {
    const OpCounters& now = op_counters();
    return GemmCounter{now.gemm_calls - start_.gemm_calls, now.unfold_calls - start_.unfold_calls};
  }

 private:
  OpCounters start_;
};

class MergedConvPlan {
 public:
  std::size_t branch_count() const { return specs_.size(); }
  std::size_t input_count() const { return input_count_; }
  const ConvSpec& spec(std::size_t k) const { return specs_[k]; }
  /// Stacked weights: K blocks of (out, (in/groups)·kh·kw).
  const std::vector<float>& stacked_weight() const { return weights_; }
  /// Stacked biases, K·out values, or empty.
  const std::vector<float>& stacked_bias() const { return bias_; }
  /// Distinct (input, patch geometry) pairs, i.e. unfolds per execution.
  std::size_t unfold_slots() const { return slot_spec_.size(); }
  /// Branches reconstructed from the stacked blocks (marked as already merged).
  std::vector<ConvBranch> branches() const;

 private:
  friend MergedConvPlan merge_parallel_convs(std::span<const ConvBranch> branches);
  friend std::vector<Tensor> execute_merged(const MergedConvPlan& plan,
                                            std::span<const Tensor* const> inputs, GemmCounter* counter);
  std::vector<ConvSpec> specs_;
  std::vector<std::size_t> bindings_;
  std::vector<std::size_t> slot_of_branch_;
  std::vector<std::size_t> slot_input_;
  std::vector<ConvSpec> slot_spec_;
  std::vector<float> weights_;
  std::vector<float> bias_;
  std::size_t input_count_ = 0;
};

/// Throws CannotMerge (naming the offending branch) unless every branch has the
/// same kernel size, stride, channel counts and groups, and the same output
/// extent for any input size (equal 2·pad − dilation·(k − 1)).
MergedConvPlan merge_parallel_convs(std::span<const ConvBranch> branches);

/// Outputs in branch order. Exactly one batched GEMM; one unfold per slot.
std::vector<Tensor> execute_merged(const MergedConvPlan& plan, std::span<const Tensor* const> inputs,
                                   GemmCounter* counter = nullptr);

}  // namespace dcnet
