// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/optim.hpp"

#include "dcnet/errors.hpp"
#include "dcnet/kernels.hpp"

namespace dcnet {

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0f)) throw InvalidArgument("learning_rate must be >= 0");
  if (!(momentum >= 0.0f && momentum < 1.0f)) throw InvalidArgument("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0f)) throw InvalidArgument("weight_decay must be >= 0");
}

void sgd_step(std::span<Parameter* const> params, const OptimizerConfig& cfg) {
  cfg.validate();
  const kernels::KernelTable& kt = kernels::active();
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    Tensor& value = p->value();
    Tensor& grad = p->grad();
    Tensor& v = p->momentum;
    if (!(v.shape() == value.shape())) v = Tensor(value.shape());
    const std::int64_t n = value.numel();
    for (std::int64_t i = 0; i < n; ++i) v[i] = cfg.momentum * v[i] + grad[i] + cfg.weight_decay * value[i];
    kt.axpy(n, -cfg.learning_rate, v.data(), value.data());
    grad.fill(0.0f);
  }
}

}  // namespace dcnet
