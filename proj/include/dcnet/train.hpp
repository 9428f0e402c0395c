// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dcnet/dcnet.hpp"
#include "dcnet/losses.hpp"
#include "dcnet/optim.hpp"

namespace dcnet {

/// One training image with its targets; every tensor has n = 1 and the
/// network input size. aux1 supervises encoder 1 (edge band), aux2 encoder 2 (location).
struct TrainSample {
  Tensor image;
  Tensor saliency;
  Tensor aux1;
  Tensor aux2;
};

struct Batch {
  Tensor images, saliency, aux1, aux2;
};

/// Stacks samples along n.
Batch make_batch(std::span<const TrainSample> samples);

struct TrainConfig {
  OptimizerConfig opt;
  std::optional<LossWeights> weights;  // all ones when unset
  Reduction reduction = Reduction::kMean;
  std::int64_t batch_size = 0;  // <= 0: whole dataset per step
};

/// Forward in train mode, total loss, backward, SGD step. Throws
/// TrainingDiverged when the loss is not finite (parameters are left untouched).
LossReport train_step(DCNet& net, const Batch& batch, const TrainConfig& cfg);

/// Called after every step with (iteration, report); return false to stop.
using TrainCallback = std::function<bool(std::int64_t, const LossReport&)>;

/// Steps over the dataset in fixed order, wrapping around; returns the total
/// loss of every executed step.
std::vector<double> train_loop(DCNet& net, std::span<const TrainSample> data, std::int64_t iterations,
                               const TrainConfig& cfg, const TrainCallback& callback = {});

}  // namespace dcnet
