// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/auxmaps.hpp"

#include <algorithm>
#include <cmath>

#include "dcnet/errors.hpp"
#include "dcnet/ops.hpp"

namespace dcnet {

void check_binary_mask(const Tensor& mask) {
  const Shape& s = mask.shape();
  if (s.n != 1 || s.c != 1 || s.h < 1 || s.w < 1)
    throw InvalidArgument("mask must be (1, 1, h, w), got " + s.str());
  for (float v : mask.span())
    if (v != 0.0f && v != 1.0f) throw InvalidArgument("mask is not binary (value " + std::to_string(v) + ")");
}

Tensor binarize(const Tensor& t, float threshold) {
  Tensor out(t.shape());
  for (std::int64_t i = 0; i < t.numel(); ++i) out[i] = t[i] >= threshold ? 1.0f : 0.0f;
  return out;
}

Grid to_grid(const Tensor& mask) {
  Grid g(static_cast<std::size_t>(mask.numel()));
  for (std::int64_t i = 0; i < mask.numel(); ++i) g[static_cast<std::size_t>(i)] = mask[i] != 0.0f ? 1 : 0;
  return g;
}

Tensor from_grid(const Grid& g, std::int64_t h, std::int64_t w) {
  Tensor t(Shape{1, 1, h, w});
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = g[static_cast<std::size_t>(i)] ? 1.0f : 0.0f;
  return t;
}

Tensor edge_map(const Tensor& mask, std::int64_t width) {
  check_binary_mask(mask);
  if (width < 1) throw InvalidArgument("edge width must be >= 1");
  const Shape& s = mask.shape();
  const std::vector<std::int32_t> d = chebyshev_to_background(to_grid(mask), s.h, s.w);
  Tensor out(s);
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    const std::int32_t v = d[static_cast<std::size_t>(i)];
    out[i] = (v > 0 && v <= width) ? 1.0f : 0.0f;
  }
  return out;
}

Tensor location_map(const Tensor& mask) {
  check_binary_mask(mask);
  const Shape& s = mask.shape();
  const std::int64_t gh = (s.h + kLocationCell - 1) / kLocationCell;
  const std::int64_t gw = (s.w + kLocationCell - 1) / kLocationCell;
  Tensor coarse(Shape{1, 1, gh, gw});
  for (std::int64_t cy = 0; cy < gh; ++cy)
    for (std::int64_t cx = 0; cx < gw; ++cx) {
      const std::int64_t y1 = std::min(s.h, (cy + 1) * kLocationCell);
      const std::int64_t x1 = std::min(s.w, (cx + 1) * kLocationCell);
      double acc = 0.0;
      for (std::int64_t y = cy * kLocationCell; y < y1; ++y)
        for (std::int64_t x = cx * kLocationCell; x < x1; ++x) acc += mask.at(0, 0, y, x);
      const double count = static_cast<double>((y1 - cy * kLocationCell) * (x1 - cx * kLocationCell));
      coarse.at(0, 0, cy, cx) = static_cast<float>(acc / count);
    }
  // Upsample to the padded extent so every cell keeps its 16-pixel footprint, then crop.
  const Tensor fine = bilinear_resize(coarse, gh * kLocationCell, gw * kLocationCell);
  Tensor out(s);
  for (std::int64_t y = 0; y < s.h; ++y)
    for (std::int64_t x = 0; x < s.w; ++x) out.at(0, 0, y, x) = fine.at(0, 0, y, x) >= 0.5f ? 1.0f : 0.0f;
  return out;
}

BodyDetail body_detail(const Tensor& mask) {
  check_binary_mask(mask);
  const Shape& s = mask.shape();
  const std::vector<double> dist = euclidean_to_background(to_grid(mask), s.h, s.w);
  const double max_dist = *std::max_element(dist.begin(), dist.end());
  BodyDetail bd{Tensor(s), Tensor(s)};
  if (max_dist <= 0.0) return bd;
  constexpr double kGrid = 65536.0;
  for (std::int64_t i = 0; i < mask.numel(); ++i) {
    const double b = std::round(dist[static_cast<std::size_t>(i)] / max_dist * kGrid) / kGrid;
    bd.body[i] = static_cast<float>(b);
    bd.detail[i] = mask[i] - bd.body[i];
  }
  return bd;
}

AuxMapSet make_aux_maps(const Tensor& mask) {
  AuxMapSet set;
  for (std::int64_t w = 1; w <= 5; ++w) set.edges.push_back(edge_map(mask, w));
  set.location = location_map(mask);
  BodyDetail bd = body_detail(mask);
  set.body = std::move(bd.body);
  set.detail = std::move(bd.detail);
  return set;
}

}  // namespace dcnet
