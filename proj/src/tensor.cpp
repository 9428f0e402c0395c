// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/tensor.hpp"

#include <cmath>

#include "dcnet/errors.hpp"

namespace dcnet {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw InvalidArgument("negative tensor extent " + shape.str());
  data_.assign(static_cast<std::size_t>(shape.numel()), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw InvalidArgument("negative tensor extent " + shape.str());
  if (static_cast<std::int64_t>(data_.size()) != shape.numel())
    throw InvalidArgument("data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape.str());
}

float Tensor::item() const {
  if (data_.size() != 1) throw InvalidArgument("item() on non-scalar tensor " + shape_.str());
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != shape_.numel())
    throw InvalidArgument("cannot reshape " + shape_.str() + " to " + shape.str());
  return Tensor(shape, data_);
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape()))
    throw InvalidArgument("max_abs_diff shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

bool all_finite(const Tensor& t) {
  for (float v : t.span())
    if (!std::isfinite(v)) return false;
  return true;
}

void ConvSpec::validate(std::int64_t h, std::int64_t w) const {
  if (in_channels <= 0 || out_channels <= 0 || groups <= 0)
    throw InvalidArgument("conv channels and groups must be positive");
  if (in_channels % groups != 0 || out_channels % groups != 0)
    throw InvalidArgument("conv channels must be divisible by groups");
  if (kh <= 0 || kw <= 0 || sh <= 0 || sw <= 0 || dh <= 0 || dw <= 0 || ph < 0 || pw < 0)
    throw InvalidArgument("invalid conv kernel/stride/dilation/padding");
  if (h + 2 * ph - dh * (kh - 1) - 1 < 0 || w + 2 * pw - dw * (kw - 1) - 1 < 0)
    throw InvalidArgument("conv output extent < 1 for input " + std::to_string(h) + "x" +
                          std::to_string(w));
}

}  // namespace dcnet
