// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/dcnet.hpp"

#include <algorithm>

#include "dcnet/errors.hpp"

namespace dcnet {

void DCNetConfig::validate() const {
  if (encoder_stages < 1) throw InvalidArgument("encoder_stages must be >= 1");
  if (decoder_stages != encoder_stages + 1)
    throw InvalidArgument("decoder_stages must equal encoder_stages + 1");
  if (static_cast<std::int64_t>(widths.size()) != encoder_stages)
    throw InvalidArgument("expected " + std::to_string(encoder_stages) + " stage widths, got " +
                          std::to_string(widths.size()));
  for (std::int64_t w : widths)
    if (w < 1) throw InvalidArgument("stage widths must be positive");
  if (mid_divisor < 1) throw InvalidArgument("mid_divisor must be >= 1");
  if (in_channels < 1) throw InvalidArgument("in_channels must be >= 1");
  const std::int64_t unit = std::int64_t{1} << (encoder_stages + 1);
  if (height < unit || width < unit || height % unit != 0 || width % unit != 0)
    throw InvalidArgument("input size " + std::to_string(height) + "x" + std::to_string(width) +
                          " must be a positive multiple of " + std::to_string(unit));
}

std::int64_t DCNetConfig::decoder_out(std::int64_t stage) const {
  if (stage < 1 || stage > decoder_stages) throw InvalidArgument("decoder stage out of range");
  return widths[static_cast<std::size_t>(std::min(stage, encoder_stages) - 1)];
}

std::int64_t DCNetConfig::decoder_in(std::int64_t stage) const {
  if (stage < 1 || stage > decoder_stages) throw InvalidArgument("decoder stage out of range");
  if (stage == decoder_stages) return 2 * widths.back();
  return 2 * widths[static_cast<std::size_t>(stage - 1)] + decoder_out(stage + 1);
}

std::int64_t DCNetConfig::decoder_mid(std::int64_t stage) const {
  return std::max<std::int64_t>(1, decoder_out(stage) / mid_divisor);
}

EncoderLayers bind_encoder(ParamBinder& binder, const std::string& prefix, const DCNetConfig& cfg,
                           std::int64_t lanes) {
  EncoderLayers enc;
  enc.lanes = lanes;
  enc.input = bind_conv_bn(binder, prefix + ".input",
                           ConvSpec::square(cfg.in_channels, lanes * cfg.widths[0], 3, 2, 1));
  std::int64_t c_in = cfg.widths[0];
  for (std::int64_t e = 1; e <= cfg.encoder_stages; ++e) {
    const std::int64_t c_out = cfg.widths[static_cast<std::size_t>(e - 1)];
    const std::string stage = prefix + ".stage" + std::to_string(e);
    enc.stages.push_back(bind_basic_block(binder, stage, lanes * c_in, lanes * c_out, e == 1 ? 1 : 2, lanes));
    enc.sides.push_back(bind_side_head(binder, prefix + ".side" + std::to_string(e), lanes * c_out, lanes, lanes));
    c_in = c_out;
  }
  return enc;
}

DecoderLayers bind_decoder(ParamBinder& binder, const DCNetConfig& cfg) {
  DecoderLayers dec;
  for (std::int64_t n = 1; n <= cfg.decoder_stages; ++n) {
    ResASPP2Config rc;
    rc.c_in = cfg.decoder_in(n);
    rc.c_out = cfg.decoder_out(n);
    rc.m = cfg.decoder_mid(n);
    const std::string name = std::string(kDecoder) + ".stage" + std::to_string(n);
    dec.stages.push_back(bind_resaspp2(binder, name, rc));
    dec.sides.push_back(bind_side_head(binder, std::string(kDecoder) + ".side" + std::to_string(n), rc.c_out));
  }
  return dec;
}

ModuleGraph build_graph(const DCNetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ModuleGraph graph{cfg, ParamStore{}, false};
  Rng rng(seed);
  ParamBinder binder(graph.params, &rng);
  bind_encoder(binder, kEncoder1, cfg, 1);
  bind_encoder(binder, kEncoder2, cfg, 1);
  bind_decoder(binder, cfg);
  return graph;
}

DCNet::DCNet(ModuleGraph& graph) : graph_(&graph) {
  graph.config.validate();
  ParamBinder binder(graph.params, nullptr);
  if (graph.encoder_merged) {
    encoders_.push_back(bind_encoder(binder, kMergedEncoder, graph.config, 2));
  } else {
    encoders_.push_back(bind_encoder(binder, kEncoder1, graph.config, 1));
    encoders_.push_back(bind_encoder(binder, kEncoder2, graph.config, 1));
  }
  decoder_ = bind_decoder(binder, graph.config);
}

void DCNet::refresh_plans() {
  plans_.clear();
  for (const ResASPP2Block& block : decoder_.stages) plans_.push_back(make_resaspp2_plans(block));
}

std::vector<ag::Var> DCNet::encode(BlockContext& ctx, const EncoderLayers& enc, const ag::Var& images,
                                   std::vector<ag::Var>& sides) {
  const DCNetConfig& cfg = graph_->config;
  std::vector<ag::Var> features;
  ag::Var x = conv_bn_forward(ctx, images, enc.input, true);
  for (std::size_t e = 0; e < enc.stages.size(); ++e) {
    x = basic_block_forward(ctx, x, enc.stages[e]);
    features.push_back(x);
    sides.push_back(side_head_forward(ctx, x, enc.sides[e], cfg.height, cfg.width));
  }
  return features;
}

ForwardVars DCNet::forward(ag::Tape& tape, const ag::Var& images, const ForwardOptions& opts) {
  const DCNetConfig& cfg = graph_->config;
  const Shape& s = images->value.shape();
  if (s.c != cfg.in_channels || s.h != cfg.height || s.w != cfg.width)
    throw InvalidArgument("input " + s.str() + " does not match the configured " +
                          std::to_string(cfg.in_channels) + "x" + std::to_string(cfg.height) + "x" +
                          std::to_string(cfg.width));
  BlockContext ctx{tape, opts.training ? BnMode::kTrain : BnMode::kEval};
  if (opts.merged_convs && plans_.empty()) refresh_plans();

  ForwardVars out;
  if (graph_->encoder_merged) {
    std::vector<ag::Var> sides;
    out.features = encode(ctx, encoders_[0], images, sides);
    for (const ag::Var& m : sides) {
      out.enc1.push_back(ag::slice_channels(tape, m, 0, 1));
      out.enc2.push_back(ag::slice_channels(tape, m, 1, 1));
    }
  } else {
    std::vector<ag::Var> f1 = encode(ctx, encoders_[0], images, out.enc1);
    std::vector<ag::Var> f2 = encode(ctx, encoders_[1], images, out.enc2);
    for (std::size_t e = 0; e < f1.size(); ++e) out.features.push_back(ag::concat_channels(tape, {f1[e], f2[e]}));
  }

  const std::size_t d = decoder_.stages.size();
  std::vector<ag::Var> dec(d);
  for (std::size_t i = d; i-- > 0;) {
    ag::Var in;
    if (i + 1 == d) {
      in = ag::maxpool2d(tape, out.features.back(), 2, 2);
    } else {
      const ag::Var& skip = out.features[i];
      ag::Var up = ag::bilinear_resize(tape, dec[i + 1], skip->value.shape().h, skip->value.shape().w);
      in = ag::concat_channels(tape, {skip, up});
    }
    dec[i] = resaspp2_forward(ctx, in, decoder_.stages[i], opts.merged_convs ? &plans_[i] : nullptr);
  }
  for (std::size_t i = 0; i < d; ++i)
    out.dec.push_back(side_head_forward(ctx, dec[i], decoder_.sides[i], cfg.height, cfg.width));
  return out;
}

ForwardOutputs DCNet::infer(const Tensor& images, bool merged_convs) {
  ag::Tape tape(false);
  ForwardVars vars = forward(tape, ag::constant(images), ForwardOptions{false, merged_convs});
  auto values = [](const std::vector<ag::Var>& vs) {
    std::vector<Tensor> t;
    t.reserve(vs.size());
    for (const ag::Var& v : vs) t.push_back(v->value);
    return t;
  };
  return ForwardOutputs{values(vars.enc1), values(vars.enc2), values(vars.dec), values(vars.features)};
}

}  // namespace dcnet
