// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcnet/autograd.hpp"
#include "dcnet/tensor.hpp"

namespace dcnet {

/// A named tensor in the module tree. Trainable parameters carry a gradient
/// (in `var`) and an SGD velocity; buffers (batchnorm running statistics) do not train.
struct Parameter {
  std::string name;
  ag::Var var;
  Tensor momentum;
  bool trainable = true;

  Tensor& value() { return var->value; }
  const Tensor& value() const { return var->value; }
  Tensor& grad() { return var->grad_buffer(); }
};

/// Ordered parameter tree keyed by dotted path ("enc1.stage2.conv1.weight").
/// Parameter addresses are stable for the lifetime of the store.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  /// Deep copy with fresh gradient/momentum state.
  ParamStore clone() const;

  Parameter& add(const std::string& name, Tensor value, bool trainable = true);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::vector<Parameter*> trainable();
  /// Sum of element counts over trainable parameters.
  std::int64_t trainable_elements() const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Deterministic RNG used for initialization.
using Rng = std::mt19937_64;

/// Creates parameters in a fresh store (when an Rng is given) or binds to the
/// existing entries of a populated store, checking shapes. Construction and
/// binding walk the same code path, so names and order always agree.
class ParamBinder {
 public:
  ParamBinder(ParamStore& store, Rng* rng) : store_(store), rng_(rng) {}

  /// He-normal weight: N(0, 2 / fan_in), fan_in = (in/groups)·kh·kw.
  Parameter& conv_weight(const std::string& name, const ConvSpec& spec);
  Parameter& zeros(const std::string& name, std::int64_t len, bool trainable = true);
  Parameter& ones(const std::string& name, std::int64_t len, bool trainable = true);

 private:
  Parameter& bind(const std::string& name, const Shape& shape, const std::function<Tensor()>& init,
                  bool trainable);
  ParamStore& store_;
  Rng* rng_;
};

}  // namespace dcnet
