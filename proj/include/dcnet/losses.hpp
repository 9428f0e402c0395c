// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Binary cross entropy, soft IoU loss and the deep-supervision total:
//   L = Σ_e w1[e]·bce(enc1[e], aux1) + w2[e]·bce(enc2[e], aux2)
//     + Σ_d wd[d]·(bce(dec[d], sal) + iou(dec[d], sal))

#pragma once

#include <span>
#include <vector>

#include "dcnet/autograd.hpp"

namespace dcnet {

/// Probability clamp for the logarithms and the IoU denominator guard.
inline constexpr double kLossEps = 1e-7;

/// kSum adds over pixels (BCE) and images (IoU). kMean divides BCE by the
/// element count and IoU by the batch size.
enum class Reduction { kSum, kMean };

/// IoU is computed per image (per n index) and then reduced over the batch.
double bce(const Tensor& p, const Tensor& g, Reduction r = Reduction::kSum);
double iou_loss(const Tensor& p, const Tensor& g, Reduction r = Reduction::kSum);

namespace ag {
Var bce(Tape& tape, const Var& p, const Tensor& g, Reduction r = Reduction::kSum);
Var iou_loss(Tape& tape, const Var& p, const Tensor& g, Reduction r = Reduction::kSum);
}  // namespace ag

struct LossWeights {
  std::vector<double> w1, w2, wd;
  static LossWeights ones(std::size_t encoder_stages, std::size_t decoder_stages);
};

struct LossReport {
  std::vector<double> l1, l2, l;
  double total = 0.0;
};

struct LossResult {
  ag::Var total;
  LossReport report;
};

/// Terms are accumulated as w1[0]·l1[0], w2[0]·l2[0], w1[1]·l1[1], ..., then
/// wd[0]·l[0], ... in float; report.total is exactly that sum.
LossResult total_loss(ag::Tape& tape, std::span<const ag::Var> enc1, std::span<const ag::Var> enc2,
                      std::span<const ag::Var> dec, const Tensor& saliency, const Tensor& aux1,
                      const Tensor& aux2, const LossWeights& weights, Reduction r = Reduction::kSum);

}  // namespace dcnet
