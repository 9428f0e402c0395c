// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/merged_conv.hpp"

#include <cstring>
#include <string>

#include "dcnet/errors.hpp"

namespace dcnet {

namespace {

std::string branch_name(std::size_t k) { return "branch " + std::to_string(k); }

std::int64_t extent_delta_h(const ConvSpec& s) { return 2 * s.ph - s.dh * (s.kh - 1); }
std::int64_t extent_delta_w(const ConvSpec& s) { return 2 * s.pw - s.dw * (s.kw - 1); }

}  // namespace

MergedConvPlan merge_parallel_convs(std::span<const ConvBranch> branches) {
  if (branches.empty()) throw CannotMerge("merge_parallel_convs: no branches");
  const ConvSpec& ref = branches.front().spec;
  const bool with_bias = branches.front().bias.has_value();
  MergedConvPlan plan;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const ConvBranch& b = branches[k];
    if (b.from_plan) throw CannotMerge(branch_name(k) + " already belongs to a merged plan");
    const ConvSpec& s = b.spec;
    try {
      s.validate(s.dh * (s.kh - 1) + 1, s.dw * (s.kw - 1) + 1);
    } catch (const InvalidArgument& e) {
      throw CannotMerge(branch_name(k) + ": " + e.what());
    }
    if (s.kh != ref.kh || s.kw != ref.kw)
      throw CannotMerge(branch_name(k) + ": kernel size differs from branch 0");
    if (s.sh != ref.sh || s.sw != ref.sw || extent_delta_h(s) != extent_delta_h(ref) ||
        extent_delta_w(s) != extent_delta_w(ref))
      throw CannotMerge(branch_name(k) + ": output size differs from branch 0");
    if (s.in_channels != ref.in_channels || s.out_channels != ref.out_channels || s.groups != ref.groups)
      throw CannotMerge(branch_name(k) + ": channel layout differs from branch 0");
    if (!(b.weight.shape() == s.weight_shape()))
      throw CannotMerge(branch_name(k) + ": weight shape " + b.weight.shape().str());
    if (b.bias.has_value() != with_bias || (with_bias && b.bias->numel() != s.out_channels))
      throw CannotMerge(branch_name(k) + ": bias presence or size differs");

    plan.specs_.push_back(s);
    plan.bindings_.push_back(b.input);
    plan.input_count_ = std::max(plan.input_count_, b.input + 1);
    std::size_t slot = plan.slot_spec_.size();
    for (std::size_t j = 0; j < plan.slot_spec_.size(); ++j)
      if (plan.slot_input_[j] == b.input && plan.slot_spec_[j].same_patch_geometry(s)) {
        slot = j;
        break;
      }
    if (slot == plan.slot_spec_.size()) {
      plan.slot_input_.push_back(b.input);
      plan.slot_spec_.push_back(s);
    }
    plan.slot_of_branch_.push_back(slot);
    plan.weights_.insert(plan.weights_.end(), b.weight.span().begin(), b.weight.span().end());
    if (with_bias) plan.bias_.insert(plan.bias_.end(), b.bias->span().begin(), b.bias->span().end());
  }
  return plan;
}

std::vector<ConvBranch> MergedConvPlan::branches() const {
  std::vector<ConvBranch> out;
  const std::int64_t wsize = specs_.empty() ? 0 : specs_[0].weight_shape().numel();
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    ConvBranch b;
    b.spec = specs_[k];
    b.weight = Tensor(specs_[k].weight_shape(),
                      std::vector<float>(weights_.begin() + k * wsize, weights_.begin() + (k + 1) * wsize));
    if (!bias_.empty()) {
      const std::int64_t o = specs_[k].out_channels;
      b.bias = Tensor(Shape{o, 1, 1, 1}, std::vector<float>(bias_.begin() + k * o, bias_.begin() + (k + 1) * o));
    }
    b.input = bindings_[k];
    b.from_plan = true;
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Tensor> execute_merged(const MergedConvPlan& plan, std::span<const Tensor* const> inputs,
                                   GemmCounter* counter) {
  GemmCounterScope scope;
  if (inputs.size() != plan.input_count())
    throw InvalidArgument("execute_merged: plan binds " + std::to_string(plan.input_count()) +
                          " inputs, got " + std::to_string(inputs.size()));
  std::vector<PatchMatrix> slots;
  slots.reserve(plan.slot_spec_.size());
  for (std::size_t j = 0; j < plan.slot_spec_.size(); ++j) {
    const Tensor* in = inputs[plan.slot_input_[j]];
    if (in == nullptr) throw InvalidArgument("execute_merged: null input");
    slots.push_back(unfold(*in, plan.slot_spec_[j]));
  }
  const PatchMatrix& first = slots[plan.slot_of_branch_[0]];
  for (const PatchMatrix& pm : slots)
    if (pm.n != first.n || pm.out_h != first.out_h || pm.out_w != first.out_w)
      throw InvalidArgument("execute_merged: bound inputs yield different output extents");

  const ConvSpec& s0 = plan.specs_[0];
  const std::int64_t rows_g = s0.patch_rows_per_group();
  const std::int64_t out_g = s0.out_channels / s0.groups;
  const std::int64_t L = first.cols;
  const std::int64_t wsize = s0.weight_shape().numel();

  std::vector<Tensor> outputs;
  outputs.reserve(plan.branch_count());
  std::vector<detail::GemmItem> items;
  for (std::size_t k = 0; k < plan.branch_count(); ++k) {
    outputs.emplace_back(Shape{first.n, s0.out_channels, first.out_h, first.out_w});
    const PatchMatrix& cols = slots[plan.slot_of_branch_[k]];
    const float* w = plan.weights_.data() + k * wsize;
    for (std::int64_t b = 0; b < first.n; ++b)
      for (std::int64_t g = 0; g < s0.groups; ++g)
        items.push_back({w + g * out_g * rows_g, cols.data.data() + (b * cols.rows + g * rows_g) * L,
                         outputs[k].data() + (b * s0.out_channels + g * out_g) * L});
  }
  detail::gemm_batch(out_g, L, rows_g, items, rows_g, L, L);

  if (!plan.bias_.empty()) {
    for (std::size_t k = 0; k < plan.branch_count(); ++k)
      for (std::int64_t b = 0; b < first.n; ++b)
        for (std::int64_t o = 0; o < s0.out_channels; ++o) {
          float* p = outputs[k].data() + (b * s0.out_channels + o) * L;
          const float bv = plan.bias_[k * s0.out_channels + o];
          for (std::int64_t i = 0; i < L; ++i) p[i] += bv;
        }
  }
  if (counter != nullptr) *counter = scope.read();
  return outputs;
}

}  // namespace dcnet
