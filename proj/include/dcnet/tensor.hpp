// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dcnet {

/// (batch, channel, height, width) extents.
struct Shape {
  std::int64_t n = 0;
  std::int64_t c = 0;
  std::int64_t h = 0;
  std::int64_t w = 0;

  std::int64_t numel() const { return n * c * h * w; }
  std::int64_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense rank-4 fp32 tensor, row-major in (n, c, h, w) order. Value semantics.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor zeros(Shape shape) { return Tensor(shape, 0.0f); }
  static Tensor full(Shape shape, float v) { return Tensor(shape, v); }
  static Tensor scalar(float v) { return Tensor(Shape{1, 1, 1, 1}, v); }
  /// 1-D parameter vector stored as (len, 1, 1, 1).
  static Tensor vector(std::int64_t len, float fill = 0.0f) { return Tensor(Shape{len, 1, 1, 1}, fill); }

  const Shape& shape() const { return shape_; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }
  bool is_scalar() const { return data_.size() == 1; }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> span() { return data_; }
  std::span<const float> span() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  float& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[static_cast<std::size_t>(((n * shape_.c + c) * shape_.h + h) * shape_.w + w)];
  }
  float at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[static_cast<std::size_t>(((n * shape_.c + c) * shape_.h + h) * shape_.w + w)];
  }

  float item() const;
  /// Same data, new extents with equal element count.
  Tensor reshaped(Shape shape) const;
  void fill(float v);

 private:
  Shape shape_{};
  std::vector<float> data_;
};

/// Largest |a - b| over all elements; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& t);

/// Convolution geometry. Weight layout is (out, in/groups, kh, kw).
struct ConvSpec {
  std::int64_t in_channels = 1;
  std::int64_t out_channels = 1;
  std::int64_t kh = 1, kw = 1;
  std::int64_t sh = 1, sw = 1;
  std::int64_t ph = 0, pw = 0;
  std::int64_t dh = 1, dw = 1;
  std::int64_t groups = 1;

  static ConvSpec square(std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t stride = 1,
                         std::int64_t pad = 0, std::int64_t dilation = 1, std::int64_t groups = 1) {
    return ConvSpec{in, out, k, k, stride, stride, pad, pad, dilation, dilation, groups};
  }

  std::int64_t out_h(std::int64_t h) const { return (h + 2 * ph - dh * (kh - 1) - 1) / sh + 1; }
  std::int64_t out_w(std::int64_t w) const { return (w + 2 * pw - dw * (kw - 1) - 1) / sw + 1; }
  /// Rows of one group's patch matrix: (in/groups)·kh·kw.
  std::int64_t patch_rows_per_group() const { return in_channels / groups * kh * kw; }
  Shape weight_shape() const { return Shape{out_channels, in_channels / groups, kh, kw}; }
  /// Same unfold geometry (kernel, stride, padding, dilation).
  bool same_patch_geometry(const ConvSpec& o) const {
    return kh == o.kh && kw == o.kw && sh == o.sh && sw == o.sw && ph == o.ph && pw == o.pw &&
           dh == o.dh && dw == o.dw;
  }
  /// Throws InvalidArgument if counts, divisibility or the output extent for (h, w) are invalid.
  void validate(std::int64_t h, std::int64_t w) const;
  bool operator==(const ConvSpec&) const = default;
};

/// Unfolded receptive patches: (n, c·kh·kw, L) with L = Ho·Wo.
struct PatchMatrix {
  std::int64_t n = 0;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t out_h = 0, out_w = 0;
  std::vector<float> data;

  float at(std::int64_t b, std::int64_t r, std::int64_t c) const {
    return data[static_cast<std::size_t>((b * rows + r) * cols + c)];
  }
};

}  // namespace dcnet
