// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Effective receptive field by input gradients: backpropagate a unit seed
// from the centre output pixel (all channels), accumulate |∂y/∂x| summed over
// input channels and seeds, normalize by the maximum.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcnet/blocks.hpp"

namespace dcnet {

enum class ErfBlock { kResASPP2, kAspp, kConv3x3, kConv1x1 };

std::string erf_block_name(ErfBlock b);
/// Accepts "resaspp2", "aspp", "conv3x3", "conv1x1".
ErfBlock parse_erf_block(const std::string& name);

struct ErfConfig {
  ResASPP2Config block{16, 8, 16, {1, 3, 5, 7}};
  std::int64_t size = 64;  // square input extent
  int seeds = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

/// (1, 1, size, size) map in [0, 1]; all zero only if every gradient vanished.
Tensor erf_map(ErfBlock block, const ErfConfig& cfg);

/// Pixels with value >= tau.
std::int64_t erf_area(const Tensor& map, double tau);

struct SupportBox {
  std::int64_t y0 = 0, x0 = 0, y1 = -1, x1 = -1;  // inclusive; empty when y1 < y0
  std::int64_t height() const { return y1 >= y0 ? y1 - y0 + 1 : 0; }
  std::int64_t width() const { return x1 >= x0 ? x1 - x0 + 1 : 0; }
};
/// Bounding box of pixels with value >= tau (tau = 0 selects any nonzero pixel).
SupportBox support_box(const Tensor& map, double tau);

struct ErfRow {
  std::string name;
  std::int64_t area = 0;
  SupportBox box;
  Tensor map;
};

/// One row per block, sorted by decreasing area (stable for ties).
std::vector<ErfRow> compare_modules(std::span<const ErfBlock> blocks, const ErfConfig& cfg, double tau);

}  // namespace dcnet
