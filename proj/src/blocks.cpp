// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/blocks.hpp"

#include "dcnet/errors.hpp"

namespace dcnet {

ConvLayer bind_conv(ParamBinder& binder, const std::string& prefix, const ConvSpec& spec, bool bias) {
  ConvLayer layer;
  layer.spec = spec;
  layer.weight = &binder.conv_weight(prefix + ".weight", spec);
  if (bias) layer.bias = &binder.zeros(prefix + ".bias", spec.out_channels);
  return layer;
}

BatchNormLayer bind_bn(ParamBinder& binder, const std::string& prefix, std::int64_t channels) {
  BatchNormLayer bn;
  bn.gamma = &binder.ones(prefix + ".gamma", channels);
  bn.beta = &binder.zeros(prefix + ".beta", channels);
  bn.running_mean = &binder.zeros(prefix + ".running_mean", channels, false);
  bn.running_var = &binder.ones(prefix + ".running_var", channels, false);
  return bn;
}

ConvBn bind_conv_bn(ParamBinder& binder, const std::string& prefix, const ConvSpec& spec) {
  return ConvBn{bind_conv(binder, prefix + ".conv", spec, false), bind_bn(binder, prefix + ".bn", spec.out_channels)};
}

ag::Var conv_forward(BlockContext& ctx, const ag::Var& x, const ConvLayer& layer) {
  return ag::conv2d(ctx.tape, x, layer.weight->var, layer.bias ? layer.bias->var : nullptr, layer.spec);
}

ag::Var bn_forward(BlockContext& ctx, const ag::Var& x, const BatchNormLayer& bn) {
  return ag::batchnorm(ctx.tape, x, bn.gamma->var, bn.beta->var, bn.running_mean->value(),
                       bn.running_var->value(), bn.eps, ctx.bn_mode, bn.momentum);
}

ag::Var conv_bn_forward(BlockContext& ctx, const ag::Var& x, const ConvBn& layer, bool relu) {
  ag::Var y = bn_forward(ctx, conv_forward(ctx, x, layer.conv), layer.bn);
  return relu ? ag::relu(ctx.tape, y) : y;
}

// ---- ResASPP² / ASPP --------------------------------------------------------

void ResASPP2Config::validate() const {
  if (c_in < 1 || m < 1 || c_out < 1) throw InvalidArgument("ResASPP2: channel counts must be >= 1");
  if (dilations.empty()) throw InvalidArgument("ResASPP2: empty dilation set");
  for (std::size_t i = 0; i < dilations.size(); ++i) {
    if (dilations[i] < 1 || dilations[i] % 2 == 0) throw InvalidArgument("ResASPP2: dilations must be odd");
    if (i > 0 && dilations[i] <= dilations[i - 1])
      throw InvalidArgument("ResASPP2: dilations must be strictly increasing");
  }
}

namespace {

// 3×3 dilated conv with pad = dilation keeps the spatial size.
ConvSpec dilated3x3(std::int64_t in, std::int64_t out, std::int64_t d) {
  return ConvSpec::square(in, out, 3, 1, d, d);
}

void check_input(const ag::Var& x, std::int64_t c_in, const char* what) {
  if (x->value.shape().c != c_in)
    throw InvalidArgument(std::string(what) + ": input has " + std::to_string(x->value.shape().c) +
                          " channels, expected " + std::to_string(c_in));
}

}  // namespace

ResASPP2Block bind_resaspp2(ParamBinder& binder, const std::string& prefix, const ResASPP2Config& cfg) {
  cfg.validate();
  ResASPP2Block b;
  b.cfg = cfg;
  const std::size_t nd = cfg.dilations.size();
  b.input = bind_conv_bn(binder, prefix + ".input", dilated3x3(cfg.c_in, cfg.c_out, 1));
  for (std::size_t i = 0; i < nd; ++i)
    b.level1.push_back(bind_conv_bn(binder, prefix + ".l1_" + std::to_string(i),
                                    dilated3x3(cfg.c_out, cfg.m, cfg.dilations[i])));
  for (std::size_t i = 0; i < nd; ++i)
    for (std::size_t j = 0; j < nd; ++j)
      b.level2.push_back(bind_conv_bn(binder, prefix + ".l2_" + std::to_string(i) + "_" + std::to_string(j),
                                      dilated3x3(cfg.m, cfg.m, cfg.dilations[j])));
  b.fuse = bind_conv_bn(binder, prefix + ".fuse",
                        ConvSpec::square(static_cast<std::int64_t>(nd * nd) * cfg.m, cfg.c_out, 1));
  return b;
}

AsppBlock bind_aspp(ParamBinder& binder, const std::string& prefix, const ResASPP2Config& cfg) {
  cfg.validate();
  AsppBlock b;
  b.cfg = cfg;
  b.input = bind_conv_bn(binder, prefix + ".input", dilated3x3(cfg.c_in, cfg.c_out, 1));
  for (std::size_t i = 0; i < cfg.dilations.size(); ++i)
    b.bank.push_back(bind_conv_bn(binder, prefix + ".bank_" + std::to_string(i),
                                  dilated3x3(cfg.c_out, cfg.m, cfg.dilations[i])));
  b.fuse = bind_conv_bn(binder, prefix + ".fuse",
                        ConvSpec::square(static_cast<std::int64_t>(cfg.dilations.size()) * cfg.m, cfg.c_out, 1));
  return b;
}

namespace {

ConvBranch branch_of(const ConvBn& layer, std::size_t input) {
  return ConvBranch{layer.conv.spec, layer.conv.weight->value(), std::nullopt, input, false};
}

// Merged bank followed by the per-branch BN + ReLU.
std::vector<ag::Var> run_bank(BlockContext& ctx, const MergedConvPlan& plan, const std::vector<ConvBn>& layers,
                              const std::vector<ag::Var>& inputs) {
  std::vector<const Tensor*> ins;
  for (const ag::Var& v : inputs) {
    if (ctx.tape.enabled() && ag::needs_grad(v))
      throw InvalidArgument("merged convolution is inference-only");
    ins.push_back(&v->value);
  }
  std::vector<Tensor> outs = execute_merged(plan, ins);
  std::vector<ag::Var> result;
  for (std::size_t k = 0; k < outs.size(); ++k)
    result.push_back(ag::relu(ctx.tape, bn_forward(ctx, ag::constant(std::move(outs[k])), layers[k].bn)));
  return result;
}

}  // namespace

ResASPP2Plans make_resaspp2_plans(const ResASPP2Block& block) {
  const std::size_t nd = block.cfg.dilations.size();
  std::vector<ConvBranch> l1, l2;
  for (std::size_t i = 0; i < nd; ++i) l1.push_back(branch_of(block.level1[i], 0));
  for (std::size_t i = 0; i < nd; ++i)
    for (std::size_t j = 0; j < nd; ++j) l2.push_back(branch_of(block.level2[i * nd + j], i));
  return ResASPP2Plans{merge_parallel_convs(l1), merge_parallel_convs(l2)};
}

ag::Var resaspp2_forward(BlockContext& ctx, const ag::Var& x, const ResASPP2Block& block,
                         const ResASPP2Plans* plans) {
  check_input(x, block.cfg.c_in, "ResASPP2");
  const std::size_t nd = block.cfg.dilations.size();
  ag::Var f = conv_bn_forward(ctx, x, block.input, true);

  std::vector<ag::Var> paths;
  if (plans != nullptr) {
    std::vector<ag::Var> l1 = run_bank(ctx, plans->level1, block.level1, {f});
    paths = run_bank(ctx, plans->level2, block.level2, l1);
  } else {
    for (std::size_t i = 0; i < nd; ++i) {
      ag::Var l1 = conv_bn_forward(ctx, f, block.level1[i], true);
      for (std::size_t j = 0; j < nd; ++j) paths.push_back(conv_bn_forward(ctx, l1, block.level2[i * nd + j], true));
    }
  }
  ag::Var fused = conv_bn_forward(ctx, ag::concat_channels(ctx.tape, paths), block.fuse, false);
  return ag::add(ctx.tape, f, fused);
}

ag::Var aspp_forward(BlockContext& ctx, const ag::Var& x, const AsppBlock& block) {
  check_input(x, block.cfg.c_in, "ASPP");
  ag::Var f = conv_bn_forward(ctx, x, block.input, true);
  std::vector<ag::Var> paths;
  for (const ConvBn& layer : block.bank) paths.push_back(conv_bn_forward(ctx, f, layer, true));
  ag::Var fused = conv_bn_forward(ctx, ag::concat_channels(ctx.tape, paths), block.fuse, false);
  return ag::add(ctx.tape, f, fused);
}

// ---- encoder block and side head -------------------------------------------

BasicBlock bind_basic_block(ParamBinder& binder, const std::string& prefix, std::int64_t c_in,
                            std::int64_t c_out, std::int64_t stride, std::int64_t groups) {
  if (stride != 1 && stride != 2) throw InvalidArgument("basic block stride must be 1 or 2");
  BasicBlock b;
  b.stride = stride;
  b.conv1 = bind_conv_bn(binder, prefix + ".conv1", ConvSpec::square(c_in, c_out, 3, stride, 1, 1, groups));
  b.conv2 = bind_conv_bn(binder, prefix + ".conv2", ConvSpec::square(c_out, c_out, 3, 1, 1, 1, groups));
  if (stride != 1 || c_in != c_out)
    b.skip = bind_conv_bn(binder, prefix + ".skip", ConvSpec::square(c_in, c_out, 1, stride, 0, 1, groups));
  return b;
}

ag::Var basic_block_forward(BlockContext& ctx, const ag::Var& x, const BasicBlock& block) {
  check_input(x, block.conv1.conv.spec.in_channels, "basic block");
  ag::Var y = conv_bn_forward(ctx, x, block.conv1, true);
  y = conv_bn_forward(ctx, y, block.conv2, false);
  ag::Var shortcut = block.skip ? conv_bn_forward(ctx, x, *block.skip, false) : x;
  return ag::relu(ctx.tape, ag::add(ctx.tape, y, shortcut));
}

SideHead bind_side_head(ParamBinder& binder, const std::string& prefix, std::int64_t c_in,
                        std::int64_t maps, std::int64_t groups) {
  return SideHead{bind_conv(binder, prefix, ConvSpec::square(c_in, maps, 3, 1, 1, 1, groups), true)};
}

ag::Var side_head_forward(BlockContext& ctx, const ag::Var& feat, const SideHead& head,
                          std::int64_t target_h, std::int64_t target_w) {
  ag::Var logits = conv_forward(ctx, feat, head.conv);
  return ag::sigmoid(ctx.tape, ag::bilinear_resize(ctx.tape, logits, target_h, target_w));
}

}  // namespace dcnet
