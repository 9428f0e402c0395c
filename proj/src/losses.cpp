// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dcnet/errors.hpp"

namespace dcnet {

namespace {

void check_pair(const Tensor& p, const Tensor& g, const char* what) {
  if (!(p.shape() == g.shape()))
    throw InvalidArgument(std::string(what) + ": prediction " + p.shape().str() + " vs target " + g.shape().str());
}

inline double clamp_p(float p) { return std::clamp(static_cast<double>(p), kLossEps, 1.0 - kLossEps); }

struct IouParts {
  std::vector<double> inter, uni;
};

IouParts iou_parts(const Tensor& p, const Tensor& g) {
  const Shape& s = p.shape();
  const std::int64_t per = s.c * s.h * s.w;
  IouParts parts{std::vector<double>(static_cast<std::size_t>(s.n)), std::vector<double>(static_cast<std::size_t>(s.n))};
  for (std::int64_t n = 0; n < s.n; ++n) {
    double inter = 0.0, uni = 0.0;
    for (std::int64_t i = n * per; i < (n + 1) * per; ++i) {
      const double pv = p[i], gv = g[i];
      inter += gv * pv;
      uni += gv + pv - gv * pv;
    }
    parts.inter[static_cast<std::size_t>(n)] = inter;
    parts.uni[static_cast<std::size_t>(n)] = uni;
  }
  return parts;
}

double bce_scale(const Tensor& p, Reduction r) {
  return r == Reduction::kMean ? 1.0 / static_cast<double>(std::max<std::int64_t>(1, p.numel())) : 1.0;
}

double iou_scale(const Tensor& p, Reduction r) {
  return r == Reduction::kMean ? 1.0 / static_cast<double>(std::max<std::int64_t>(1, p.shape().n)) : 1.0;
}

}  // namespace

double bce(const Tensor& p, const Tensor& g, Reduction r) {
  check_pair(p, g, "bce");
  double acc = 0.0;
  for (std::int64_t i = 0; i < p.numel(); ++i) {
    const double pc = clamp_p(p[i]), gv = g[i];
    acc -= gv * std::log(pc) + (1.0 - gv) * std::log(1.0 - pc);
  }
  return acc * bce_scale(p, r);
}

double iou_loss(const Tensor& p, const Tensor& g, Reduction r) {
  check_pair(p, g, "iou_loss");
  const IouParts parts = iou_parts(p, g);
  double acc = 0.0;
  for (std::size_t n = 0; n < parts.inter.size(); ++n) acc += 1.0 - parts.inter[n] / (parts.uni[n] + kLossEps);
  return acc * iou_scale(p, r);
}

namespace ag {

Var bce(Tape& tape, const Var& p, const Tensor& g, Reduction r) {
  Tensor out = Tensor::scalar(static_cast<float>(dcnet::bce(p->value, g, r)));
  return tape.record(std::move(out), {p}, [p, g, r](const Tensor& grad) {
    const double k = grad[0] * bce_scale(p->value, r);
    Tensor d(p->value.shape());
    for (std::int64_t i = 0; i < d.numel(); ++i) {
      const double pc = clamp_p(p->value[i]);
      d[i] = static_cast<float>(k * (pc - g[i]) / (pc * (1.0 - pc)));
    }
    p->accumulate(d);
  });
}

Var iou_loss(Tape& tape, const Var& p, const Tensor& g, Reduction r) {
  Tensor out = Tensor::scalar(static_cast<float>(dcnet::iou_loss(p->value, g, r)));
  return tape.record(std::move(out), {p}, [p, g, r](const Tensor& grad) {
    const double k = grad[0] * iou_scale(p->value, r);
    const IouParts parts = iou_parts(p->value, g);
    const Shape& s = p->value.shape();
    const std::int64_t per = s.c * s.h * s.w;
    Tensor d(s);
    for (std::int64_t n = 0; n < s.n; ++n) {
      const double inter = parts.inter[static_cast<std::size_t>(n)];
      const double u = parts.uni[static_cast<std::size_t>(n)] + kLossEps;
      for (std::int64_t i = n * per; i < (n + 1) * per; ++i) {
        const double gv = g[i];
        // d(1 - I/U)/dp = -(g·U - I·(1 - g)) / U²
        d[i] = static_cast<float>(-k * (gv * u - inter * (1.0 - gv)) / (u * u));
      }
    }
    p->accumulate(d);
  });
}

}  // namespace ag

LossWeights LossWeights::ones(std::size_t encoder_stages, std::size_t decoder_stages) {
  return LossWeights{std::vector<double>(encoder_stages, 1.0), std::vector<double>(encoder_stages, 1.0),
                     std::vector<double>(decoder_stages, 1.0)};
}

LossResult total_loss(ag::Tape& tape, std::span<const ag::Var> enc1, std::span<const ag::Var> enc2,
                      std::span<const ag::Var> dec, const Tensor& saliency, const Tensor& aux1,
                      const Tensor& aux2, const LossWeights& weights, Reduction r) {
  if (enc1.size() != enc2.size() || weights.w1.size() != enc1.size() || weights.w2.size() != enc2.size() ||
      weights.wd.size() != dec.size())
    throw InvalidArgument("total_loss: " + std::to_string(enc1.size()) + "+" + std::to_string(enc2.size()) +
                          " encoder and " + std::to_string(dec.size()) + " decoder maps vs weights " +
                          std::to_string(weights.w1.size()) + "/" + std::to_string(weights.w2.size()) + "/" +
                          std::to_string(weights.wd.size()));
  LossResult res;
  ag::Var total;
  auto accumulate = [&](const ag::Var& term, double w) {
    ag::Var weighted = ag::scale(tape, term, static_cast<float>(w));
    total = total ? ag::add(tape, total, weighted) : weighted;
  };
  for (std::size_t e = 0; e < enc1.size(); ++e) {
    ag::Var a = ag::bce(tape, enc1[e], aux1, r);
    ag::Var b = ag::bce(tape, enc2[e], aux2, r);
    res.report.l1.push_back(a->value.item());
    res.report.l2.push_back(b->value.item());
    accumulate(a, weights.w1[e]);
    accumulate(b, weights.w2[e]);
  }
  for (std::size_t d = 0; d < dec.size(); ++d) {
    ag::Var term = ag::add(tape, ag::bce(tape, dec[d], saliency, r), ag::iou_loss(tape, dec[d], saliency, r));
    res.report.l.push_back(term->value.item());
    accumulate(term, weights.wd[d]);
  }
  if (!total) total = ag::constant(Tensor::scalar(0.0f));
  res.total = total;
  res.report.total = total->value.item();
  return res;
}

}  // namespace dcnet
