// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "dcnet/params.hpp"

namespace dcnet {

struct OptimizerConfig {
  float learning_rate = 0.01f;
  float momentum = 0.9f;
  float weight_decay = 1e-4f;

  void validate() const;
};

/// SGD with momentum and L2 weight decay, then zeroes the gradients:
///   v <- momentum·v + grad + weight_decay·value
///   value <- value - lr·v
void sgd_step(std::span<Parameter* const> params, const OptimizerConfig& cfg);

}  // namespace dcnet
