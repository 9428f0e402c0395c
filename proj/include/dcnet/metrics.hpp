// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Saliency evaluation: MAE, 256-threshold precision/recall/F curves, max F,
// weighted F, S-measure and mean E-measure. Predictions are (1, 1, h, w) maps
// in [0, 1]; ground truth is a binary mask of the same shape.
//
// Thresholding: a prediction is quantized to q = floor(255·p + 0.5) and a pixel
// is positive at threshold t ∈ {0..255} iff q >= t. Threshold 0 therefore marks
// every pixel positive.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dcnet/tensor.hpp"

namespace dcnet {

struct MetricConfig {
  double beta2_f = 0.3;
  double beta2_wf = 1.0;
  double alpha_s = 0.5;
  int thresholds = 256;
  double eps = 1e-8;

  void validate() const;
};

inline constexpr int kThresholds = 256;

struct CurveData {
  std::array<double, kThresholds> precision{};
  std::array<double, kThresholds> recall{};
  std::array<double, kThresholds> f{};
};

struct MetricReport {
  double mae = 0.0;
  double max_f = 0.0;
  double weighted_f = 0.0;
  double s_measure = 0.0;
  double e_measure_mean = 0.0;
};

std::uint8_t quantize(float p);

double mae(const Tensor& pred, const Tensor& gt);
CurveData pr_and_f_curves(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg = {});
double max_f(const CurveData& curve);

struct WeightedF {
  double value = 0.0;
  bool degenerate = false;  // empty ground truth; value is 0
};
WeightedF weighted_f(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg = {});

double s_measure(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg = {});

/// E-measure at every threshold (index t) and their mean.
std::array<double, kThresholds> e_measure_curve(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg = {});
double e_measure_mean(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg = {});

struct ImageEvaluation {
  MetricReport report;
  CurveData curve;
};
ImageEvaluation evaluate_image(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg = {});

/// Dataset aggregation: scalar metrics and curves are means over images; max F
/// is taken over the mean F curve.
class DatasetEvaluator {
 public:
  explicit DatasetEvaluator(MetricConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }
  void add(const Tensor& pred, const Tensor& gt);
  std::size_t count() const { return images_; }
  MetricReport report() const;
  CurveData curve() const;

 private:
  MetricConfig cfg_;
  std::size_t images_ = 0;
  MetricReport sums_;
  CurveData curve_sums_;
};

}  // namespace dcnet
