// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/params.hpp"

#include <cmath>

#include "dcnet/errors.hpp"

namespace dcnet {

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& p : params_) out.add(p->name, p->value(), p->trainable);
  return out;
}

Parameter& ParamStore::add(const std::string& name, Tensor value, bool trainable) {
  if (contains(name)) throw InvalidArgument("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->momentum = Tensor(value.shape());
  p->var = ag::leaf(std::move(value), trainable);
  p->trainable = trainable;
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

Parameter& ParamStore::at(const std::string& name) {
  if (Parameter* p = find(name)) return *p;
  throw InvalidArgument("unknown parameter: " + name);
}

const Parameter& ParamStore::at(const std::string& name) const {
  if (const Parameter* p = find(name)) return *p;
  throw InvalidArgument("unknown parameter: " + name);
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParamStore::trainable() {
  std::vector<Parameter*> out;
  for (auto& p : params_)
    if (p->trainable) out.push_back(p.get());
  return out;
}

std::int64_t ParamStore::trainable_elements() const {
  std::int64_t n = 0;
  for (const auto& p : params_)
    if (p->trainable) n += p->value().numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_)
    if (!p->var->grad.empty()) p->var->grad.fill(0.0f);
}

Parameter& ParamBinder::bind(const std::string& name, const Shape& shape,
                             const std::function<Tensor()>& init, bool trainable) {
  if (Parameter* p = store_.find(name)) {
    if (!(p->value().shape() == shape))
      throw InvalidArgument("parameter " + name + " has shape " + p->value().shape().str() +
                            ", expected " + shape.str());
    return *p;
  }
  if (rng_ == nullptr) throw InvalidArgument("missing parameter: " + name);
  return store_.add(name, init(), trainable);
}

Parameter& ParamBinder::conv_weight(const std::string& name, const ConvSpec& spec) {
  const Shape shape = spec.weight_shape();
  return bind(name, shape, [&] {
    Tensor t(shape);
    const double fan_in = static_cast<double>(spec.patch_rows_per_group());
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / fan_in));
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(nd(*rng_));
    return t;
  }, true);
}

Parameter& ParamBinder::zeros(const std::string& name, std::int64_t len, bool trainable) {
  return bind(name, Shape{len, 1, 1, 1}, [&] { return Tensor::vector(len, 0.0f); }, trainable);
}

Parameter& ParamBinder::ones(const std::string& name, std::int64_t len, bool trainable) {
  return bind(name, Shape{len, 1, 1, 1}, [&] { return Tensor::vector(len, 1.0f); }, trainable);
}

}  // namespace dcnet
