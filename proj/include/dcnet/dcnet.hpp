// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// The dual-encoder saliency network: two structurally identical encoders
// (each supervised by its own auxiliary target), a decoder of ResASPP² stages,
// and a sigmoid side head on every stage.
//
// Spatial layout for an H×W input and E encoder stages:
//   input conv (stride 2)        H/2
//   encoder stage e (1..E)       H/2^e   (stage 1 keeps the size, later stages halve it)
//   decoder stage E+1            H/2^(E+1), fed by maxpool(concat(En E_1, En E_2))
//   decoder stage N (1..E)       H/2^N,  fed by concat(En N_1, En N_2, upsample(De N+1))
// Every side map is resized to H×W.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcnet/blocks.hpp"
#include "dcnet/params.hpp"

namespace dcnet {

struct DCNetConfig {
  std::int64_t encoder_stages = 4;
  std::int64_t decoder_stages = 5;
  std::vector<std::int64_t> widths{16, 32, 64, 128};  // encoder stage widths
  std::int64_t mid_divisor = 2;                        // ResASPP² m = c_out / mid_divisor
  std::int64_t in_channels = 3;
  std::int64_t height = 64;
  std::int64_t width = 64;

  void validate() const;
  /// Decoder stage N (1-based): output channels, input channels, ResASPP² m.
  std::int64_t decoder_out(std::int64_t stage) const;
  std::int64_t decoder_in(std::int64_t stage) const;
  std::int64_t decoder_mid(std::int64_t stage) const;
  /// Spatial size of encoder stage e (1-based) and decoder stage N.
  std::int64_t stage_height(std::int64_t stage) const { return height >> stage; }
  std::int64_t stage_width(std::int64_t stage) const { return width >> stage; }
};

/// Named parameter tree plus the configuration it was built for. The dual
/// (training) form has subtrees "enc1", "enc2", "dec"; the merged (inference)
/// form replaces the two encoders by a single grouped encoder "penc".
struct ModuleGraph {
  DCNetConfig config;
  ParamStore params;
  bool encoder_merged = false;

  ModuleGraph clone() const { return ModuleGraph{config, params.clone(), encoder_merged}; }
};

/// Fresh dual-encoder graph; He-normal conv weights drawn from `seed`.
ModuleGraph build_graph(const DCNetConfig& cfg, std::uint64_t seed);

struct ForwardOptions {
  bool training = false;      // batchnorm train mode (batch statistics, running-stat updates)
  bool merged_convs = false;  // run ResASPP² dilated banks as merged convolutions
};

/// Side maps (n, 1, H, W). enc1/enc2 hold E maps each, dec holds D maps with
/// dec[0] = Sup1, the final saliency prediction. `features[e]` is the
/// concatenated stage-(e+1) output of both encoders.
struct ForwardVars {
  std::vector<ag::Var> enc1, enc2, dec;
  std::vector<ag::Var> features;
  const ag::Var& sup1() const { return dec.front(); }
  std::size_t count() const { return enc1.size() + enc2.size() + dec.size(); }
};

struct ForwardOutputs {
  std::vector<Tensor> enc1, enc2, dec;
  std::vector<Tensor> features;
  const Tensor& sup1() const { return dec.front(); }
  std::size_t count() const { return enc1.size() + enc2.size() + dec.size(); }
};

/// Encoder layers for one lane (dual form) or both lanes at once (merged form:
/// every tensor doubled along the output channel, groups = 2 after the input conv).
struct EncoderLayers {
  std::int64_t lanes = 1;
  ConvBn input;
  std::vector<BasicBlock> stages;
  std::vector<SideHead> sides;  // `lanes` maps per head
};

struct DecoderLayers {
  std::vector<ResASPP2Block> stages;  // stages[N-1] is De N
  std::vector<SideHead> sides;
};

/// Binds layer views into a graph's parameter store. The graph must outlive the
/// DCNet. Merged-convolution plans are snapshots of the current weights; call
/// refresh_plans() or invalidate_plans() after changing parameters.
class DCNet {
 public:
  explicit DCNet(ModuleGraph& graph);

  const DCNetConfig& config() const { return graph_->config; }
  ModuleGraph& graph() { return *graph_; }
  bool encoder_merged() const { return graph_->encoder_merged; }

  ForwardVars forward(ag::Tape& tape, const ag::Var& images, const ForwardOptions& opts = {});
  /// Inference in eval mode, no tape.
  ForwardOutputs infer(const Tensor& images, bool merged_convs = false);

  void refresh_plans();
  /// Drops the plans; the next merged forward rebuilds them.
  void invalidate_plans() { plans_.clear(); }
  std::vector<Parameter*> trainable() { return graph_->params.trainable(); }

 private:
  std::vector<ag::Var> encode(BlockContext& ctx, const EncoderLayers& enc, const ag::Var& images,
                              std::vector<ag::Var>& sides);

  ModuleGraph* graph_;
  std::vector<EncoderLayers> encoders_;  // two in dual form, one in merged form
  DecoderLayers decoder_;
  std::vector<ResASPP2Plans> plans_;
};

/// Shared layer construction; used both to create and to bind parameters.
EncoderLayers bind_encoder(ParamBinder& binder, const std::string& prefix, const DCNetConfig& cfg,
                           std::int64_t lanes);
DecoderLayers bind_decoder(ParamBinder& binder, const DCNetConfig& cfg);

/// Parameter subtree names.
inline constexpr const char* kEncoder1 = "enc1";
inline constexpr const char* kEncoder2 = "enc2";
inline constexpr const char* kMergedEncoder = "penc";
inline constexpr const char* kDecoder = "dec";

}  // namespace dcnet
