// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Forward numeric kernels over Tensor. Convolution is unfold -> GEMM -> fold.
// All functions are pure: inputs are never modified (batchnorm running
// statistics are explicit in/out state, not inputs).

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcnet/tensor.hpp"

namespace dcnet {

/// Per-thread invocation counters for GEMM calls and unfold calls. A batched
/// GEMM counts once regardless of its batch size.
struct OpCounters {
  std::uint64_t gemm_calls = 0;
  std::uint64_t unfold_calls = 0;
};
OpCounters& op_counters();

// ---- convolution ----------------------------------------------------------

PatchMatrix unfold(const Tensor& input, const ConvSpec& spec);
/// Adjoint of unfold (col2im): scatters patch columns back, summing overlaps.
Tensor fold(const PatchMatrix& cols, const ConvSpec& spec, const Shape& input_shape);

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor* bias, const ConvSpec& spec);
/// GEMM + bias stage of conv2d over an already unfolded input.
Tensor conv2d_from_patches(const PatchMatrix& cols, const Tensor& weight, const Tensor* bias,
                           const ConvSpec& spec);
/// Checks weight (out, in/groups, kh, kw) and bias (out) against spec.
void check_conv_params(const Tensor& weight, const Tensor* bias, const ConvSpec& spec);

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& weight, const ConvSpec& spec,
                         const Shape& input_shape);
/// Accumulates dL/dW into grad_weight.
void conv2d_grad_weight(const Tensor& grad_out, const PatchMatrix& cols, const ConvSpec& spec,
                        Tensor& grad_weight);
/// Accumulates dL/db into grad_bias.
void conv2d_grad_bias(const Tensor& grad_out, Tensor& grad_bias);

// ---- matrix products ------------------------------------------------------

/// Matrices are tensors of shape (1, 1, rows, cols); batches are (B, 1, rows, cols).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor batched_matmul(const Tensor& a, const Tensor& b);

namespace detail {
struct GemmItem {
  const float* a;
  const float* b;
  float* c;
};
/// One batched GEMM invocation over items sharing (m, n, k) and leading dims.
void gemm_batch(std::int64_t m, std::int64_t n, std::int64_t k, std::span<const GemmItem> items,
                std::int64_t lda, std::int64_t ldb, std::int64_t ldc, bool accumulate = false);
}  // namespace detail

// ---- resampling and pooling ----------------------------------------------

/// Bilinear interpolation with align_corners = false.
Tensor bilinear_resize(const Tensor& input, std::int64_t out_h, std::int64_t out_w);
/// Transpose of bilinear_resize: routes each output gradient through the same weights.
Tensor bilinear_resize_backward(const Tensor& grad_out, const Shape& input_shape);

struct MaxPoolResult {
  Tensor out;
  std::vector<std::int64_t> argmax;  // flat input index per output element
};
MaxPoolResult maxpool2d_with_indices(const Tensor& input, std::int64_t kernel, std::int64_t stride);
Tensor maxpool2d(const Tensor& input, std::int64_t kernel = 2, std::int64_t stride = 2);
Tensor avgpool2d(const Tensor& input, std::int64_t kernel, std::int64_t stride);
Tensor avgpool2d_backward(const Tensor& grad_out, const Shape& input_shape, std::int64_t kernel,
                          std::int64_t stride);

// ---- pointwise ------------------------------------------------------------

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float s);
Tensor concat_channels(std::span<const Tensor* const> parts);
Tensor concat_channels(std::initializer_list<const Tensor*> parts);
/// Channels [begin, begin + count).
Tensor slice_channels(const Tensor& x, std::int64_t begin, std::int64_t count);
double sum(const Tensor& x);

// ---- batch normalization --------------------------------------------------

enum class BnMode { kTrain, kEval };

struct BatchNormStats {
  std::vector<double> mean;
  std::vector<double> inv_std;
};

/// Train mode normalizes with biased batch statistics and updates running
/// stats: r <- (1 - momentum)·r + momentum·batch (unbiased variance).
/// Eval mode uses the running statistics. Parameter vectors have C elements.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                 Tensor& running_var, float eps, BnMode mode, float momentum = 0.1f,
                 BatchNormStats* stats_out = nullptr);

}  // namespace dcnet
