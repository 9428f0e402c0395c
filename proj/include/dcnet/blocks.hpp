// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Network building blocks: ResASPP² (two-level residual nested ASPP), the
// single-level ASPP baseline, the residual encoder block and side-output heads.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcnet/autograd.hpp"
#include "dcnet/merged_conv.hpp"
#include "dcnet/params.hpp"

namespace dcnet {

struct ConvLayer {
  ConvSpec spec;
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;  // null for convs followed by batchnorm
};

struct BatchNormLayer {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  Parameter* running_mean = nullptr;
  Parameter* running_var = nullptr;
  float eps = 1e-5f;
  float momentum = 0.1f;
};

struct ConvBn {
  ConvLayer conv;
  BatchNormLayer bn;
};

/// Forward-pass settings shared by all blocks.
struct BlockContext {
  ag::Tape& tape;
  BnMode bn_mode = BnMode::kEval;
};

ConvLayer bind_conv(ParamBinder& binder, const std::string& prefix, const ConvSpec& spec, bool bias);
BatchNormLayer bind_bn(ParamBinder& binder, const std::string& prefix, std::int64_t channels);
/// Bias-free conv followed by batchnorm.
ConvBn bind_conv_bn(ParamBinder& binder, const std::string& prefix, const ConvSpec& spec);

ag::Var conv_forward(BlockContext& ctx, const ag::Var& x, const ConvLayer& layer);
ag::Var bn_forward(BlockContext& ctx, const ag::Var& x, const BatchNormLayer& bn);
ag::Var conv_bn_forward(BlockContext& ctx, const ag::Var& x, const ConvBn& layer, bool relu);

// ---- ResASPP² / ASPP --------------------------------------------------------

struct ResASPP2Config {
  std::int64_t c_in = 16;
  std::int64_t m = 8;
  std::int64_t c_out = 16;
  std::vector<std::int64_t> dilations{1, 3, 5, 7};

  /// Dilations strictly increasing and odd; all counts >= 1.
  void validate() const;
};

/// Input conv F (c_in -> c_out), level-1 bank of |d| dilated convs
/// (c_out -> m), level-2 bank of |d| dilated convs per level-1 branch
/// (m -> m, |d|² paths), 1×1 fusion of the concatenated paths (|d|²·m ->
/// c_out, batchnorm, no activation), output F + fusion.
struct ResASPP2Block {
  ResASPP2Config cfg;
  ConvBn input;
  std::vector<ConvBn> level1;
  std::vector<ConvBn> level2;  // branch i, dilation j at i·|d| + j
  ConvBn fuse;
};

/// Single-level baseline: F, one bank of dilated convs, 1×1 fusion, residual add.
struct AsppBlock {
  ResASPP2Config cfg;
  ConvBn input;
  std::vector<ConvBn> bank;
  ConvBn fuse;
};

ResASPP2Block bind_resaspp2(ParamBinder& binder, const std::string& prefix, const ResASPP2Config& cfg);
AsppBlock bind_aspp(ParamBinder& binder, const std::string& prefix, const ResASPP2Config& cfg);

/// Merged-convolution plans for both dilated banks of one ResASPP² block.
struct ResASPP2Plans {
  MergedConvPlan level1;  // one input (F), |d| branches
  MergedConvPlan level2;  // |d| inputs, |d|² branches
};
ResASPP2Plans make_resaspp2_plans(const ResASPP2Block& block);

/// With `plans`, the dilated banks run through merged convolutions; that path
/// is inference-only and rejects inputs that require gradients.
ag::Var resaspp2_forward(BlockContext& ctx, const ag::Var& x, const ResASPP2Block& block,
                         const ResASPP2Plans* plans = nullptr);
ag::Var aspp_forward(BlockContext& ctx, const ag::Var& x, const AsppBlock& block);

// ---- encoder block and side head -------------------------------------------

/// conv3×3(stride)-BN-ReLU, conv3×3-BN, skip (1×1 conv + BN when the stride or
/// channel count changes, identity otherwise), add, ReLU. `groups` applies to
/// every conv (2 for the merged dual encoder).
struct BasicBlock {
  ConvBn conv1;
  ConvBn conv2;
  std::optional<ConvBn> skip;
  std::int64_t stride = 1;
};

BasicBlock bind_basic_block(ParamBinder& binder, const std::string& prefix, std::int64_t c_in,
                            std::int64_t c_out, std::int64_t stride, std::int64_t groups = 1);
ag::Var basic_block_forward(BlockContext& ctx, const ag::Var& x, const BasicBlock& block);

/// 3×3 conv (with bias) to `maps` channels, bilinear resize, sigmoid.
struct SideHead {
  ConvLayer conv;
};

SideHead bind_side_head(ParamBinder& binder, const std::string& prefix, std::int64_t c_in,
                        std::int64_t maps = 1, std::int64_t groups = 1);
ag::Var side_head_forward(BlockContext& ctx, const ag::Var& feat, const SideHead& head,
                          std::int64_t target_h, std::int64_t target_w);

}  // namespace dcnet
