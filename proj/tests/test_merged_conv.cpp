// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "dcnet/errors.hpp"
#include "dcnet/merged_conv.hpp"
#include "oracles.hpp"

namespace dcnet {
namespace {

using testing::random_tensor;

ConvBranch random_branch(const ConvSpec& spec, std::mt19937_64& rng, bool bias, std::size_t input = 0) {
  ConvBranch b{spec, random_tensor(spec.weight_shape(), rng), std::nullopt, input, false};
  if (bias) b.bias = random_tensor(Shape{spec.out_channels, 1, 1, 1}, rng);
  return b;
}

std::vector<ConvBranch> dilation_bank(std::mt19937_64& rng, std::int64_t c_in, std::int64_t c_out,
                                      std::initializer_list<std::int64_t> dilations, bool bias = false) {
  std::vector<ConvBranch> out;
  for (std::int64_t d : dilations) out.push_back(random_branch(ConvSpec::square(c_in, c_out, 3, 1, d, d), rng, bias));
  return out;
}

void expect_matches_per_branch(const std::vector<ConvBranch>& branches, const std::vector<const Tensor*>& inputs,
                               const std::vector<Tensor>& outputs) {
  ASSERT_EQ(outputs.size(), branches.size());
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const ConvBranch& b = branches[k];
    const Tensor* bias = b.bias ? &*b.bias : nullptr;
    const Tensor ref = testing::conv_direct(*inputs[b.input], b.weight, bias, b.spec);
    ASSERT_EQ(outputs[k].shape(), ref.shape()) << "branch " << k;
    EXPECT_LE(max_abs_diff(outputs[k], ref), 1e-5) << "branch " << k;
  }
}

TEST(MergedConv, SingleBranchEqualsConv2d) {
  std::mt19937_64 rng(1);
  const std::vector<ConvBranch> one = {random_branch(ConvSpec::square(3, 5, 3, 1, 2, 2), rng, true)};
  const Tensor x = random_tensor(Shape{2, 3, 9, 7}, rng);
  const MergedConvPlan plan = merge_parallel_convs(one);
  const Tensor* in[] = {&x};
  const std::vector<Tensor> out = execute_merged(plan, in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].values(), conv2d(x, one[0].weight, &*one[0].bias, one[0].spec).values());
}

TEST(MergedConv, FourDilationsShareOneGemm) {
  std::mt19937_64 rng(2);
  const std::vector<ConvBranch> bank = dilation_bank(rng, 4, 6, {1, 3, 5, 7}, true);
  const Tensor x = random_tensor(Shape{2, 4, 16, 16}, rng);
  const MergedConvPlan plan = merge_parallel_convs(bank);
  EXPECT_EQ(plan.branch_count(), 4u);
  EXPECT_EQ(plan.unfold_slots(), 4u);

  const Tensor* in[] = {&x};
  GemmCounter merged;
  const std::vector<Tensor> out = execute_merged(plan, in, &merged);
  EXPECT_EQ(merged.gemm_calls, 1u);
  EXPECT_EQ(merged.unfold_calls, 4u);
  expect_matches_per_branch(bank, {&x}, out);

  GemmCounterScope scope;
  for (const ConvBranch& b : bank) conv2d(x, b.weight, &*b.bias, b.spec);
  EXPECT_EQ(scope.read().gemm_calls, 4u);
  EXPECT_EQ(scope.read().unfold_calls, 4u);
}

TEST(MergedConv, EqualGeometryBranchesShareOneUnfold) {
  std::mt19937_64 rng(3);
  const std::vector<ConvBranch> bank = dilation_bank(rng, 3, 2, {2, 2, 2, 2});
  const Tensor x = random_tensor(Shape{1, 3, 10, 10}, rng);
  const MergedConvPlan plan = merge_parallel_convs(bank);
  EXPECT_EQ(plan.unfold_slots(), 1u);
  const Tensor* in[] = {&x};
  GemmCounter c;
  const std::vector<Tensor> out = execute_merged(plan, in, &c);
  EXPECT_EQ(c.gemm_calls, 1u);
  EXPECT_EQ(c.unfold_calls, 1u);
  expect_matches_per_branch(bank, {&x}, out);
}

TEST(MergedConv, DistinctInputsMatchSeparateConvs) {
  std::mt19937_64 rng(4);
  std::vector<ConvBranch> bank = {random_branch(ConvSpec::square(3, 4, 3, 1, 1, 1), rng, true, 0),
                                  random_branch(ConvSpec::square(3, 4, 3, 1, 3, 3), rng, true, 1)};
  const Tensor a = random_tensor(Shape{2, 3, 8, 12}, rng), b = random_tensor(Shape{2, 3, 8, 12}, rng);
  const MergedConvPlan plan = merge_parallel_convs(bank);
  EXPECT_EQ(plan.input_count(), 2u);
  const Tensor* in[] = {&a, &b};
  GemmCounter c;
  expect_matches_per_branch(bank, {&a, &b}, execute_merged(plan, in, &c));
  EXPECT_EQ(c.gemm_calls, 1u);
}

TEST(MergedConv, SixteenBranchesOverFourInputs) {
  // Level-2 shape of a ResASPP² block: four inputs, four dilations each.
  std::mt19937_64 rng(5);
  std::vector<ConvBranch> bank;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::int64_t d : {1, 3, 5, 7}) bank.push_back(random_branch(ConvSpec::square(2, 2, 3, 1, d, d), rng, false, i));
  std::vector<Tensor> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(random_tensor(Shape{1, 2, 11, 9}, rng));
  const MergedConvPlan plan = merge_parallel_convs(bank);
  std::vector<const Tensor*> in;
  for (const Tensor& x : xs) in.push_back(&x);
  GemmCounter c;
  const std::vector<Tensor> out = execute_merged(plan, in, &c);
  EXPECT_EQ(c.gemm_calls, 1u);
  EXPECT_EQ(c.unfold_calls, 16u);
  expect_matches_per_branch(bank, in, out);
}

TEST(MergedConv, StackedWeightsAreBranchBlocks) {
  std::mt19937_64 rng(6);
  const std::vector<ConvBranch> bank = dilation_bank(rng, 2, 3, {1, 3}, true);
  const MergedConvPlan plan = merge_parallel_convs(bank);
  const std::size_t block = static_cast<std::size_t>(bank[0].weight.numel());
  ASSERT_EQ(plan.stacked_weight().size(), 2 * block);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < block; ++i)
      EXPECT_EQ(plan.stacked_weight()[k * block + i], bank[k].weight[static_cast<std::int64_t>(i)]);
  ASSERT_EQ(plan.stacked_bias().size(), 6u);
  EXPECT_EQ(plan.stacked_bias()[3], (*bank[1].bias)[0]);
}

TEST(MergedConv, MismatchedBranchesCannotMerge) {
  std::mt19937_64 rng(7);
  const auto expect_rejects = [](const std::vector<ConvBranch>& bank, const std::string& needle) {
    try {
      merge_parallel_convs(bank);
      ADD_FAILURE() << "merged " << needle;
    } catch (const CannotMerge& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  // Kernel size.
  expect_rejects({random_branch(ConvSpec::square(2, 2, 3, 1, 1), rng, false),
                  random_branch(ConvSpec::square(2, 2, 1, 1, 0), rng, false)},
                 "branch 1");
  // Output size: dilation 3 with pad 1 shrinks the map.
  expect_rejects({random_branch(ConvSpec::square(2, 2, 3, 1, 1, 1), rng, false),
                  random_branch(ConvSpec::square(2, 2, 3, 1, 1, 1), rng, false),
                  random_branch(ConvSpec::square(2, 2, 3, 1, 1, 3), rng, false)},
                 "branch 2");
  // Stride.
  expect_rejects({random_branch(ConvSpec::square(2, 2, 3, 1, 1), rng, false),
                  random_branch(ConvSpec::square(2, 2, 3, 2, 1), rng, false)},
                 "branch 1");
  // Mixed bias presence.
  expect_rejects({random_branch(ConvSpec::square(2, 2, 3, 1, 1), rng, true),
                  random_branch(ConvSpec::square(2, 2, 3, 1, 1), rng, false)},
                 "branch 1");
  EXPECT_THROW(merge_parallel_convs(std::vector<ConvBranch>{}), CannotMerge);
}

TEST(MergedConv, RemergingIsRejected) {
  std::mt19937_64 rng(8);
  const MergedConvPlan plan = merge_parallel_convs(dilation_bank(rng, 2, 2, {1, 3, 5}));
  const std::vector<ConvBranch> again = plan.branches();
  ASSERT_EQ(again.size(), 3u);
  for (const ConvBranch& b : again) EXPECT_TRUE(b.from_plan);
  EXPECT_THROW(merge_parallel_convs(again), CannotMerge);
}

TEST(MergedConv, BindingMismatchIsInvalid) {
  std::mt19937_64 rng(9);
  std::vector<ConvBranch> bank = {random_branch(ConvSpec::square(2, 2, 3, 1, 1), rng, false, 0),
                                  random_branch(ConvSpec::square(2, 2, 3, 1, 1), rng, false, 1)};
  const MergedConvPlan plan = merge_parallel_convs(bank);
  const Tensor a = random_tensor(Shape{1, 2, 6, 6}, rng), b = random_tensor(Shape{1, 2, 7, 6}, rng);
  const Tensor* only_one[] = {&a};
  EXPECT_THROW(execute_merged(plan, only_one), InvalidArgument);
  const Tensor* uneven[] = {&a, &b};
  EXPECT_THROW(execute_merged(plan, uneven), InvalidArgument);
  const Tensor wrong_channels(Shape{1, 3, 6, 6});
  const Tensor* bad[] = {&a, &wrong_channels};
  EXPECT_THROW(execute_merged(plan, bad), InvalidArgument);
}

}  // namespace
}  // namespace dcnet
