// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Tape-based reverse-mode differentiation over the tensor ops.
//
// Ops append a record (inputs, output, backward closure) to the tape in
// execution order. backward() zeroes the gradients of every recorded output,
// seeds the root, and replays the records once in reverse. Leaf gradients
// (parameters, inputs) accumulate across calls; intermediate gradients do not.
// A disabled tape records nothing, which is how inference runs.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "dcnet/ops.hpp"
#include "dcnet/tensor.hpp"

namespace dcnet::ag {

struct Node {
  Tensor value;
  Tensor grad;  // empty until the first contribution
  bool requires_grad = false;

  /// Gradient storage, zero-initialized on first access.
  Tensor& grad_buffer();
  void accumulate(const Tensor& g);
};

using Var = std::shared_ptr<Node>;

Var constant(Tensor value);
Var leaf(Tensor value, bool requires_grad = true);

using BackwardFn = std::function<void(const Tensor& grad_out)>;

class Tape {
 public:
  explicit Tape(bool enabled = true) : enabled_(enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool enabled() const { return enabled_; }
  std::size_t size() const { return records_.size(); }

  /// Wraps `value` as an op output; records `fn` when any input needs a gradient.
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn fn);

  /// Reverse pass from a scalar loss (seed 1).
  void backward(const Var& loss);
  /// Reverse pass from any recorded tensor with an explicit seed gradient.
  void backward(const Var& output, const Tensor& seed);

 private:
  struct Record {
    std::vector<Var> inputs;
    Var output;
    BackwardFn fn;
  };
  std::vector<Record> records_;
  bool enabled_;
};

bool needs_grad(const Var& v);

// ---- differentiable ops ---------------------------------------------------

Var conv2d(Tape& tape, const Var& x, const Var& weight, const Var& bias, const ConvSpec& spec);
/// `bias` may be null. Running statistics are updated in train mode.
Var batchnorm(Tape& tape, const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean,
              Tensor& running_var, float eps, BnMode mode, float momentum = 0.1f);
Var relu(Tape& tape, const Var& x);
Var sigmoid(Tape& tape, const Var& x);
Var add(Tape& tape, const Var& a, const Var& b);
Var scale(Tape& tape, const Var& x, float s);
Var concat_channels(Tape& tape, const std::vector<Var>& parts);
Var slice_channels(Tape& tape, const Var& x, std::int64_t begin, std::int64_t count);
Var bilinear_resize(Tape& tape, const Var& x, std::int64_t out_h, std::int64_t out_w);
Var maxpool2d(Tape& tape, const Var& x, std::int64_t kernel = 2, std::int64_t stride = 2);
Var avgpool2d(Tape& tape, const Var& x, std::int64_t kernel, std::int64_t stride);
/// Scalar sum of all elements.
Var sum(Tape& tape, const Var& x);

// ---- gradient checking ----------------------------------------------------

struct GradCheckOptions {
  double step = 1e-3;
  double tol = 1e-3;
  /// false: scalarize by plain sum; true: by a fixed random projection.
  bool random_projection = true;
  std::uint64_t seed = 7;
  /// Check at most this many input elements (random subset); <= 0 checks all.
  std::int64_t max_checks = 0;
  /// A probe that misses is retried with step/2, /4, /8 before it counts as a
  /// failure. Central differences across a ReLU or max kink are wrong by up to
  /// the slope jump; a smaller step moves the kink out of the stencil, while a
  /// wrong analytic gradient keeps missing at every step.
  int kink_retries = 3;
  /// Last resort for a kink sitting on the probe itself: accept when the
  /// one-sided slopes differ by more than 2·tol (a visible jump) and the
  /// analytic value lies between them, widened by tol.
  bool accept_bracketed_kinks = true;
};

struct GradCheckReport {
  double max_rel_error = 0.0;  // max |analytic - numeric| / max(‖analytic‖∞, ‖numeric‖∞)
  double max_abs_error = 0.0;
  std::int64_t checked = 0;
  /// Probes that matched only after a step reduction.
  std::int64_t retried = 0;
  /// Probes accepted by the one-sided bracket at a detected kink.
  std::int64_t kinks = 0;
  bool non_finite = false;
  bool passed = false;
};

/// fn maps an input to any tensor; it is scalarized in fp64 and compared
/// against central differences of step `step`.
using TensorFn = std::function<Var(Tape&, const Var&)>;
GradCheckReport grad_check(const TensorFn& fn, const Tensor& input, const GradCheckOptions& opts = {});

/// For scalar objectives whose fp32 value is too coarse to difference (a loss
/// summed over many terms): `fn` supplies the analytic gradient, `value`
/// evaluates the same objective in double for the central differences.
using ScalarFn = std::function<double(const Tensor&)>;
GradCheckReport grad_check(const TensorFn& fn, const Tensor& input, const ScalarFn& value,
                           const GradCheckOptions& opts = {});

}  // namespace dcnet::ag
