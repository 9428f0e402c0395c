// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dcnet/erf.hpp"
#include "dcnet/errors.hpp"

namespace dcnet {
namespace {

ErfConfig small_config(std::int64_t size = 40, int seeds = 10) {
  ErfConfig cfg;
  cfg.block = ResASPP2Config{8, 4, 8, {1, 3, 5, 7}};
  cfg.size = size;
  cfg.seeds = seeds;
  return cfg;
}

// Box of side `extent` centred on the output pixel used as the seed.
bool inside_centred(const SupportBox& b, std::int64_t size, std::int64_t extent) {
  const std::int64_t c = size / 2, r = extent / 2;
  return b.height() > 0 && b.y0 >= c - r && b.y1 <= c + r && b.x0 >= c - r && b.x1 <= c + r;
}

TEST(ErfArea, TrivialMaps) {
  EXPECT_EQ(erf_area(Tensor(Shape{1, 1, 8, 8}), 0.01), 0);
  Tensor one(Shape{1, 1, 8, 8});
  one.at(0, 0, 2, 5) = 1.0f;
  EXPECT_EQ(erf_area(one, 0.01), 1);
  const SupportBox b = support_box(one, 0.01);
  EXPECT_EQ(b.y0, 2);
  EXPECT_EQ(b.x1, 5);
  EXPECT_EQ(b.height(), 1);
  EXPECT_EQ(support_box(Tensor(Shape{1, 1, 8, 8}), 0.01).height(), 0);
}

TEST(ErfMap, PlainConvolutionsHaveAnalyticSupport) {
  const ErfConfig cfg = small_config(24);
  const Tensor m3 = erf_map(ErfBlock::kConv3x3, cfg), m1 = erf_map(ErfBlock::kConv1x1, cfg);
  EXPECT_EQ(erf_area(m3, 0.01), 9);
  EXPECT_EQ(erf_area(m1, 0.01), 1);
  const SupportBox b3 = support_box(m3, 0.0), b1 = support_box(m1, 0.0);
  EXPECT_EQ(b3.height(), 3);
  EXPECT_EQ(b3.width(), 3);
  EXPECT_TRUE(inside_centred(b3, 24, 3));
  EXPECT_EQ(b1.height() * b1.width(), 1);
}

TEST(ErfMap, NormalizedToUnitMaximum) {
  const ErfConfig cfg = small_config(32, 3);
  for (ErfBlock b : {ErfBlock::kResASPP2, ErfBlock::kAspp, ErfBlock::kConv3x3}) {
    const Tensor m = erf_map(b, cfg);
    EXPECT_EQ(*std::max_element(m.span().begin(), m.span().end()), 1.0f) << erf_block_name(b);
    EXPECT_GE(*std::min_element(m.span().begin(), m.span().end()), 0.0f);
  }
}

TEST(ErfMap, SupportStaysInsideAnalyticReceptiveField) {
  const ErfConfig cfg = small_config(48, 4);
  // Input conv plus the largest dilated 3×3 path, composed with the
  // residual bank: 31 for ResASPP², 17 for the single-level baseline.
  EXPECT_TRUE(inside_centred(support_box(erf_map(ErfBlock::kResASPP2, cfg), 0.0), 48, 31));
  EXPECT_TRUE(inside_centred(support_box(erf_map(ErfBlock::kAspp, cfg), 0.0), 48, 17));
}

TEST(ErfMap, AreaIsMonotoneInTau) {
  const Tensor m = erf_map(ErfBlock::kResASPP2, small_config(40, 3));
  std::int64_t prev = erf_area(m, 1e-6);
  for (double tau : {1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3, 0.6, 0.99}) {
    const std::int64_t a = erf_area(m, tau);
    EXPECT_LE(a, prev) << "tau " << tau;
    prev = a;
  }
  EXPECT_GE(prev, 1);
}

TEST(CompareModules, ResAspp2BeatsAsppAtMatchedConfig) {
  const ErfConfig cfg = small_config(48, 10);
  const std::vector<ErfBlock> blocks{ErfBlock::kAspp, ErfBlock::kResASPP2};
  const std::vector<ErfRow> rows = compare_modules(blocks, cfg, 0.01);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].name, erf_block_name(ErfBlock::kResASPP2));
  EXPECT_GT(rows[0].area, rows[1].area);
  EXPECT_EQ(rows[0].area, erf_area(rows[0].map, 0.01));
}

TEST(CompareModules, SameBlockTwiceAgreesAcrossSeeds) {
  ErfConfig a = small_config(40, 10), b = a;
  b.seed = 99;
  const std::int64_t area_a = erf_area(erf_map(ErfBlock::kResASPP2, a), 0.01);
  const std::int64_t area_b = erf_area(erf_map(ErfBlock::kResASPP2, b), 0.01);
  EXPECT_LE(std::abs(area_a - area_b), 0.05 * static_cast<double>(std::max(area_a, area_b)));
  const std::vector<ErfBlock> twice{ErfBlock::kResASPP2, ErfBlock::kResASPP2};
  const std::vector<ErfRow> rows = compare_modules(twice, a, 0.01);
  EXPECT_EQ(rows[0].area, rows[1].area);
}

TEST(CompareModules, ThreeRowsSortedByArea) {
  const std::vector<ErfBlock> blocks{ErfBlock::kConv1x1, ErfBlock::kConv3x3, ErfBlock::kAspp};
  const std::vector<ErfRow> rows = compare_modules(blocks, small_config(32, 2), 0.01);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].name, "aspp");
  EXPECT_EQ(rows[1].area, 9);
  EXPECT_EQ(rows[2].area, 1);
}

TEST(Erf, InvalidArguments) {
  EXPECT_THROW(parse_erf_block("rsu"), InvalidArgument);
  for (ErfBlock b : {ErfBlock::kResASPP2, ErfBlock::kAspp, ErfBlock::kConv3x3, ErfBlock::kConv1x1})
    EXPECT_EQ(parse_erf_block(erf_block_name(b)), b);
  ErfConfig cfg = small_config();
  cfg.seeds = 0;
  EXPECT_THROW(erf_map(ErfBlock::kAspp, cfg), InvalidArgument);
  const std::vector<ErfBlock> one{ErfBlock::kAspp};
  EXPECT_THROW(compare_modules(one, small_config(), 0.01), InvalidArgument);
  const std::vector<ErfBlock> two{ErfBlock::kAspp, ErfBlock::kConv3x3};
  EXPECT_THROW(compare_modules(two, small_config(), 1.5), InvalidArgument);
}

}  // namespace
}  // namespace dcnet
