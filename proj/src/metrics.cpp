// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dcnet/auxmaps.hpp"
#include "dcnet/distance.hpp"
#include "dcnet/errors.hpp"

namespace dcnet {

void MetricConfig::validate() const {
  if (!(beta2_f > 0.0) || !(beta2_wf > 0.0) || !(alpha_s > 0.0) || !(eps > 0.0))
    throw InvalidArgument("metric parameters must be positive");
  if (thresholds != kThresholds) throw InvalidArgument("exactly 256 thresholds are supported");
}

namespace {

void check_pair(const Tensor& pred, const Tensor& gt) {
  check_binary_mask(gt);
  if (!(pred.shape() == gt.shape()))
    throw InvalidArgument("prediction " + pred.shape().str() + " does not match ground truth " + gt.shape().str());
}

double mean_of(const Tensor& t) {
  double s = 0.0;
  for (float v : t.span()) s += v;
  return s / static_cast<double>(t.numel());
}

// Per-threshold counts of predicted-positive pixels inside and outside the GT.
struct ThresholdCounts {
  std::array<double, kThresholds> tp{}, fp{};
  double fg = 0.0, total = 0.0;
};

ThresholdCounts threshold_counts(const Tensor& pred, const Tensor& gt) {
  std::array<double, kThresholds> hist_fg{}, hist_bg{};
  ThresholdCounts c;
  for (std::int64_t i = 0; i < pred.numel(); ++i) {
    const std::uint8_t q = quantize(pred[i]);
    if (gt[i] != 0.0f) {
      hist_fg[q] += 1.0;
      c.fg += 1.0;
    } else {
      hist_bg[q] += 1.0;
    }
  }
  c.total = static_cast<double>(pred.numel());
  double tp = 0.0, fp = 0.0;
  for (int t = kThresholds - 1; t >= 0; --t) {
    tp += hist_fg[static_cast<std::size_t>(t)];
    fp += hist_bg[static_cast<std::size_t>(t)];
    c.tp[static_cast<std::size_t>(t)] = tp;
    c.fp[static_cast<std::size_t>(t)] = fp;
  }
  return c;
}

// ---- S-measure pieces ------------------------------------------------------

struct Region {
  std::vector<double> pred, gt;
};

double ssim_region(const Region& r) {
  const std::size_t n = r.pred.size();
  if (n == 0) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += r.pred[i];
    my += r.gt[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += (r.pred[i] - mx) * (r.pred[i] - mx);
    sy += (r.gt[i] - my) * (r.gt[i] - my);
    sxy += (r.pred[i] - mx) * (r.gt[i] - my);
  }
  const double denom = static_cast<double>(std::max<std::size_t>(n - 1, 1));
  sx /= denom;
  sy /= denom;
  sxy /= denom;
  const double alpha = 4.0 * mx * my * sxy;
  const double beta = (mx * mx + my * my) * (sx + sy);
  // alpha != 0 implies both variances are positive, so beta > 0.
  if (alpha != 0.0) return alpha / beta;
  return beta == 0.0 ? 1.0 : 0.0;
}

// Similarity of a region's values to a uniform map of ones.
double s_object_part(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double sd = 0.0;
  if (values.size() > 1) {
    for (double v : values) sd += (v - m) * (v - m);
    sd = std::sqrt(sd / static_cast<double>(values.size() - 1));
  }
  return 2.0 * m / (m * m + 1.0 + sd);
}

double s_object(const Tensor& pred, const Tensor& gt) {
  std::vector<double> fg, bg;
  for (std::int64_t i = 0; i < pred.numel(); ++i) {
    if (gt[i] != 0.0f)
      fg.push_back(pred[i]);
    else
      bg.push_back(1.0 - pred[i]);
  }
  const double u = static_cast<double>(fg.size()) / static_cast<double>(pred.numel());
  return u * s_object_part(fg) + (1.0 - u) * s_object_part(bg);
}

double s_region(const Tensor& pred, const Tensor& gt) {
  const std::int64_t h = gt.shape().h, w = gt.shape().w;
  double sy = 0.0, sx = 0.0, count = 0.0;
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      if (gt.at(0, 0, y, x) != 0.0f) {
        sy += static_cast<double>(y);
        sx += static_cast<double>(x);
        count += 1.0;
      }
  // Centroid rounded half-to-even, then shifted to a 1-based split position.
  const std::int64_t cx = static_cast<std::int64_t>(std::nearbyint(sx / count)) + 1;
  const std::int64_t cy = static_cast<std::int64_t>(std::nearbyint(sy / count)) + 1;
  const std::int64_t xs = std::min(cx, w), ys = std::min(cy, h);

  Region parts[4];
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      const int k = (y < ys ? 0 : 2) + (x < xs ? 0 : 1);
      parts[k].pred.push_back(pred.at(0, 0, y, x));
      parts[k].gt.push_back(gt.at(0, 0, y, x));
    }
  const double area = static_cast<double>(h * w);
  const double w1 = static_cast<double>(xs * ys) / area;
  const double w2 = static_cast<double>(ys * (w - xs)) / area;
  const double w3 = static_cast<double>((h - ys) * xs) / area;
  const double w4 = 1.0 - w1 - w2 - w3;
  return w1 * ssim_region(parts[0]) + w2 * ssim_region(parts[1]) + w3 * ssim_region(parts[2]) +
         w4 * ssim_region(parts[3]);
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size * size));
  const int r = size / 2;
  double total = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double v = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      k[static_cast<std::size_t>((y + r) * size + x + r)] = v;
      total += v;
    }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace

std::uint8_t quantize(float p) {
  const double q = std::floor(static_cast<double>(p) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

double mae(const Tensor& pred, const Tensor& gt) {
  check_pair(pred, gt);
  double s = 0.0;
  for (std::int64_t i = 0; i < pred.numel(); ++i) s += std::abs(static_cast<double>(pred[i]) - gt[i]);
  return s / static_cast<double>(pred.numel());
}

CurveData pr_and_f_curves(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg) {
  check_pair(pred, gt);
  const ThresholdCounts c = threshold_counts(pred, gt);
  CurveData curve;
  for (std::size_t t = 0; t < kThresholds; ++t) {
    const double tp = c.tp[t], fp = c.fp[t], fn = c.fg - tp;
    const double p = tp / (tp + fp + cfg.eps);
    const double r = tp / (tp + fn + cfg.eps);
    curve.precision[t] = p;
    curve.recall[t] = r;
    curve.f[t] = (1.0 + cfg.beta2_f) * p * r / (cfg.beta2_f * p + r + cfg.eps);
  }
  return curve;
}

double max_f(const CurveData& curve) { return *std::max_element(curve.f.begin(), curve.f.end()); }

WeightedF weighted_f(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg) {
  check_pair(pred, gt);
  const std::int64_t h = gt.shape().h, w = gt.shape().w, n = h * w;
  const Grid fg = to_grid(gt);
  if (std::none_of(fg.begin(), fg.end(), [](std::uint8_t v) { return v != 0; })) return WeightedF{0.0, true};

  const std::vector<double> dist2 = squared_edt(fg, h, w);
  const std::vector<std::int64_t> nearest = nearest_feature_index(fg, h, w);
  std::vector<double> e(static_cast<std::size_t>(n)), et(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = std::abs(static_cast<double>(pred[i]) - gt[i]);
  // Background errors take the error of their nearest foreground pixel.
  for (std::int64_t i = 0; i < n; ++i)
    et[static_cast<std::size_t>(i)] = fg[static_cast<std::size_t>(i)] ? e[static_cast<std::size_t>(i)]
                                                                         : e[static_cast<std::size_t>(nearest[static_cast<std::size_t>(i)])];
  constexpr int kSize = 7;
  const std::vector<double> k = gaussian_kernel(kSize, 5.0);
  const int r = kSize / 2;
  double tpw = 0.0, fpw = 0.0, ew_fg = 0.0, n_fg = 0.0;
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      double ea = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const std::int64_t yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          ea += k[static_cast<std::size_t>((dy + r) * kSize + dx + r)] * et[static_cast<std::size_t>(yy * w + xx)];
        }
      const std::size_t i = static_cast<std::size_t>(y * w + x);
      if (fg[i]) {
        const double ew = std::min(e[i], ea);
        ew_fg += ew;
        n_fg += 1.0;
      } else {
        const double b = 2.0 - std::exp(std::log(0.5) / 5.0 * std::sqrt(dist2[i]));
        fpw += e[i] * b;
      }
    }
  tpw = n_fg - ew_fg;
  const double recall = 1.0 - ew_fg / n_fg;
  const double precision = tpw / (tpw + fpw + cfg.eps);
  const double b2 = cfg.beta2_wf;
  return WeightedF{(1.0 + b2) * recall * precision / (recall + b2 * precision + cfg.eps), false};
}

double s_measure(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg) {
  check_pair(pred, gt);
  const double y = mean_of(gt);
  if (y == 0.0) return 1.0 - mean_of(pred);
  if (y == 1.0) return mean_of(pred);
  const double s = cfg.alpha_s * s_object(pred, gt) + (1.0 - cfg.alpha_s) * s_region(pred, gt);
  return std::max(0.0, s);
}

std::array<double, kThresholds> e_measure_curve(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg) {
  check_pair(pred, gt);
  const ThresholdCounts c = threshold_counts(pred, gt);
  const double n = c.total;
  std::array<double, kThresholds> em{};
  for (std::size_t t = 0; t < kThresholds; ++t) {
    const double tp = c.tp[t], fp = c.fp[t];
    const double pos = tp + fp;
    double sum;
    if (c.fg == 0.0) {
      sum = n - pos;
    } else if (c.fg == n) {
      sum = pos;
    } else {
      const double mu_p = pos / n, mu_g = c.fg / n;
      // (binary pred, binary gt) combinations with their pixel counts.
      const double counts[4] = {tp, c.fg - tp, fp, n - c.fg - fp};
      const double phi_p[4] = {1.0 - mu_p, -mu_p, 1.0 - mu_p, -mu_p};
      const double phi_g[4] = {1.0 - mu_g, 1.0 - mu_g, -mu_g, -mu_g};
      sum = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double align = 2.0 * phi_p[k] * phi_g[k] / (phi_p[k] * phi_p[k] + phi_g[k] * phi_g[k] + cfg.eps);
        sum += counts[k] * (align + 1.0) * (align + 1.0) / 4.0;
      }
    }
    em[t] = sum / n;
  }
  return em;
}

double e_measure_mean(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg) {
  const auto em = e_measure_curve(pred, gt, cfg);
  double s = 0.0;
  for (double v : em) s += v;
  return s / static_cast<double>(kThresholds);
}

ImageEvaluation evaluate_image(const Tensor& pred, const Tensor& gt, const MetricConfig& cfg) {
  cfg.validate();
  ImageEvaluation ev;
  ev.curve = pr_and_f_curves(pred, gt, cfg);
  ev.report.mae = mae(pred, gt);
  ev.report.max_f = max_f(ev.curve);
  ev.report.weighted_f = weighted_f(pred, gt, cfg).value;
  ev.report.s_measure = s_measure(pred, gt, cfg);
  ev.report.e_measure_mean = e_measure_mean(pred, gt, cfg);
  return ev;
}

void DatasetEvaluator::add(const Tensor& pred, const Tensor& gt) {
  const ImageEvaluation ev = evaluate_image(pred, gt, cfg_);
  sums_.mae += ev.report.mae;
  sums_.weighted_f += ev.report.weighted_f;
  sums_.s_measure += ev.report.s_measure;
  sums_.e_measure_mean += ev.report.e_measure_mean;
  for (std::size_t t = 0; t < kThresholds; ++t) {
    curve_sums_.precision[t] += ev.curve.precision[t];
    curve_sums_.recall[t] += ev.curve.recall[t];
    curve_sums_.f[t] += ev.curve.f[t];
  }
  ++images_;
}

CurveData DatasetEvaluator::curve() const {
  if (images_ == 0) throw InvalidArgument("no images evaluated");
  CurveData c = curve_sums_;
  const double k = 1.0 / static_cast<double>(images_);
  for (std::size_t t = 0; t < kThresholds; ++t) {
    c.precision[t] *= k;
    c.recall[t] *= k;
    c.f[t] *= k;
  }
  return c;
}

MetricReport DatasetEvaluator::report() const {
  const CurveData c = curve();
  const double k = 1.0 / static_cast<double>(images_);
  MetricReport r;
  r.mae = sums_.mae * k;
  r.max_f = max_f(c);
  r.weighted_f = sums_.weighted_f * k;
  r.s_measure = sums_.s_measure * k;
  r.e_measure_mean = sums_.e_measure_mean * k;
  return r;
}

}  // namespace dcnet
