// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/erf.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dcnet/errors.hpp"

namespace dcnet {

std::string erf_block_name(ErfBlock b) {
  switch (b) {
    case ErfBlock::kResASPP2: return "resaspp2";
    case ErfBlock::kAspp: return "aspp";
    case ErfBlock::kConv3x3: return "conv3x3";
    case ErfBlock::kConv1x1: return "conv1x1";
  }
  return "?";
}

ErfBlock parse_erf_block(const std::string& name) {
  for (ErfBlock b : {ErfBlock::kResASPP2, ErfBlock::kAspp, ErfBlock::kConv3x3, ErfBlock::kConv1x1})
    if (erf_block_name(b) == name) return b;
  throw InvalidArgument("unknown block '" + name + "' (expected resaspp2, aspp, conv3x3 or conv1x1)");
}

void ErfConfig::validate() const {
  block.validate();
  if (size < 1) throw InvalidArgument("ERF input size must be >= 1");
  if (seeds < 1) throw InvalidArgument("ERF needs at least one seed");
}

namespace {

// Gradient of the centre output pixel (summed over channels) w.r.t. the input.
Tensor input_gradient(ErfBlock kind, const ErfConfig& cfg, std::uint64_t seed) {
  ParamStore store;
  Rng rng(seed);
  ParamBinder binder(store, &rng);
  const ResASPP2Config& bc = cfg.block;

  std::normal_distribution<float> normal(0.0f, 1.0f);
  Tensor input(Shape{1, bc.c_in, cfg.size, cfg.size});
  for (float& v : input.span()) v = normal(rng);

  ag::Tape tape(true);
  BlockContext ctx{tape, BnMode::kEval};
  ag::Var x = ag::leaf(input, true);
  ag::Var y;
  switch (kind) {
    case ErfBlock::kResASPP2: y = resaspp2_forward(ctx, x, bind_resaspp2(binder, "block", bc)); break;
    case ErfBlock::kAspp: y = aspp_forward(ctx, x, bind_aspp(binder, "block", bc)); break;
    case ErfBlock::kConv3x3:
      y = conv_forward(ctx, x, bind_conv(binder, "block", ConvSpec::square(bc.c_in, bc.c_out, 3, 1, 1), true));
      break;
    case ErfBlock::kConv1x1:
      y = conv_forward(ctx, x, bind_conv(binder, "block", ConvSpec::square(bc.c_in, bc.c_out, 1), true));
      break;
  }
  const Shape& os = y->value.shape();
  if (os.h != cfg.size || os.w != cfg.size)
    throw InvalidArgument(erf_block_name(kind) + " does not preserve the spatial size");
  Tensor seed_grad(os);
  for (std::int64_t c = 0; c < os.c; ++c) seed_grad.at(0, c, os.h / 2, os.w / 2) = 1.0f;
  tape.backward(y, seed_grad);
  return x->grad_buffer();
}

}  // namespace

Tensor erf_map(ErfBlock block, const ErfConfig& cfg) {
  cfg.validate();
  std::vector<double> acc(static_cast<std::size_t>(cfg.size * cfg.size), 0.0);
  for (int s = 0; s < cfg.seeds; ++s) {
    const Tensor g = input_gradient(block, cfg, cfg.seed + static_cast<std::uint64_t>(s));
    const Shape& gs = g.shape();
    for (std::int64_t c = 0; c < gs.c; ++c)
      for (std::int64_t i = 0; i < gs.h * gs.w; ++i)
        acc[static_cast<std::size_t>(i)] += std::abs(static_cast<double>(g[c * gs.h * gs.w + i]));
  }
  const double peak = *std::max_element(acc.begin(), acc.end());
  Tensor map(Shape{1, 1, cfg.size, cfg.size});
  if (peak > 0.0)
    for (std::size_t i = 0; i < acc.size(); ++i) map[static_cast<std::int64_t>(i)] = static_cast<float>(acc[i] / peak);
  return map;
}

std::int64_t erf_area(const Tensor& map, double tau) {
  return std::count_if(map.span().begin(), map.span().end(), [tau](float v) { return v > 0.0f && v >= tau; });
}

SupportBox support_box(const Tensor& map, double tau) {
  SupportBox box{map.shape().h, map.shape().w, -1, -1};
  for (std::int64_t y = 0; y < map.shape().h; ++y)
    for (std::int64_t x = 0; x < map.shape().w; ++x) {
      const float v = map.at(0, 0, y, x);
      if (v <= 0.0f || v < tau) continue;
      box.y0 = std::min(box.y0, y);
      box.x0 = std::min(box.x0, x);
      box.y1 = std::max(box.y1, y);
      box.x1 = std::max(box.x1, x);
    }
  if (box.y1 < 0) return SupportBox{};
  return box;
}

std::vector<ErfRow> compare_modules(std::span<const ErfBlock> blocks, const ErfConfig& cfg, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1)");
  if (blocks.size() < 2) throw InvalidArgument("comparison needs at least two blocks");
  std::vector<ErfRow> rows;
  for (ErfBlock b : blocks) {
    ErfRow row;
    row.name = erf_block_name(b);
    row.map = erf_map(b, cfg);
    row.area = erf_area(row.map, tau);
    row.box = support_box(row.map, tau);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ErfRow& a, const ErfRow& b) { return a.area > b.area; });
  return rows;
}

}  // namespace dcnet
