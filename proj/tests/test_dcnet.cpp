// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dcnet/dataset.hpp"
#include "dcnet/dcnet.hpp"
#include "dcnet/errors.hpp"
#include "dcnet/losses.hpp"
#include "dcnet/train.hpp"
#include "oracles.hpp"

namespace dcnet {
namespace {

using testing::random_tensor;

DCNetConfig small_config(std::int64_t size = 16) {
  DCNetConfig cfg;
  cfg.encoder_stages = 2;
  cfg.decoder_stages = 3;
  cfg.widths = {8, 8};
  cfg.height = size;
  cfg.width = size;
  return cfg;
}

// Trainable element count derived by hand from the layer list: convs carry
// (in/groups)·k²·out weights, every BN two trainable vectors, side heads a bias.
std::int64_t expected_trainable(const std::vector<std::int64_t>& w, std::int64_t in_ch, std::int64_t divisor) {
  const auto E = static_cast<std::int64_t>(w.size());
  const std::int64_t D = E + 1;
  auto conv_bn = [](std::int64_t ci, std::int64_t co, std::int64_t k) { return ci * co * k * k + 2 * co; };
  auto side = [](std::int64_t ci) { return ci * 9 + 1; };

  std::int64_t lane = conv_bn(in_ch, w[0], 3);
  for (std::int64_t e = 1; e <= E; ++e) {
    const std::int64_t ci = e == 1 ? w[0] : w[e - 2], co = w[e - 1];
    lane += conv_bn(ci, co, 3) + conv_bn(co, co, 3) + side(co);
    if (e > 1 || ci != co) lane += conv_bn(ci, co, 1);
  }

  auto c_out = [&](std::int64_t n) { return w[std::min(n, E) - 1]; };
  std::int64_t dec = 0;
  for (std::int64_t n = 1; n <= D; ++n) {
    const std::int64_t co = c_out(n);
    const std::int64_t ci = n == D ? 2 * w[E - 1] : 2 * w[n - 1] + c_out(n + 1);
    const std::int64_t m = std::max<std::int64_t>(1, co / divisor);
    dec += conv_bn(ci, co, 3) + 4 * conv_bn(co, m, 3) + 16 * conv_bn(m, m, 3) + conv_bn(16 * m, co, 1) + side(co);
  }
  return 2 * lane + dec;
}

TEST(DCNet, DefaultParameterCountMatchesClosedForm) {
  const DCNetConfig cfg;
  const ModuleGraph g = build_graph(cfg, 1);
  EXPECT_EQ(g.params.trainable_elements(), expected_trainable({16, 32, 64, 128}, 3, 2));
  const ModuleGraph s = build_graph(small_config(), 1);
  EXPECT_EQ(s.params.trainable_elements(), expected_trainable({8, 8}, 3, 2));
}

TEST(DCNet, TwoIsomorphicEncoderSubtrees) {
  const ModuleGraph g = build_graph(DCNetConfig{}, 2);
  std::size_t enc1 = 0, enc2 = 0, dec = 0;
  for (const Parameter* p : g.params.all()) {
    const std::string root = p->name.substr(0, p->name.find('.'));
    if (root == kEncoder1) {
      ++enc1;
      const Parameter* twin = g.params.find(std::string(kEncoder2) + p->name.substr(root.size()));
      ASSERT_NE(twin, nullptr) << p->name;
      EXPECT_EQ(twin->value().shape(), p->value().shape()) << p->name;
    } else if (root == kEncoder2) {
      ++enc2;
    } else {
      EXPECT_EQ(root, kDecoder) << p->name;
      ++dec;
    }
  }
  EXPECT_EQ(enc1, enc2);
  EXPECT_GT(enc1, 0u);
  EXPECT_GT(dec, 0u);
}

TEST(DCNet, SameSeedIsBitIdentical) {
  const ModuleGraph a = build_graph(small_config(), 7), b = build_graph(small_config(), 7);
  const ModuleGraph c = build_graph(small_config(), 8);
  bool any_differs = false;
  for (const Parameter* p : a.params.all()) {
    EXPECT_EQ(p->value().values(), b.params.at(p->name).value().values()) << p->name;
    any_differs |= p->value().values() != c.params.at(p->name).value().values();
  }
  EXPECT_TRUE(any_differs);
}

TEST(DCNet, InvalidConfigsAreRejected) {
  DCNetConfig cfg = small_config();
  cfg.decoder_stages = 4;
  EXPECT_THROW(build_graph(cfg, 1), InvalidArgument);
  cfg = small_config(20);  // not a multiple of 2^(E+1)
  EXPECT_THROW(build_graph(cfg, 1), InvalidArgument);
  cfg = small_config();
  cfg.widths = {8};
  EXPECT_THROW(build_graph(cfg, 1), InvalidArgument);
}

TEST(DCNet, DefaultForwardGivesThirteenMapsInOpenUnitInterval) {
  const DCNetConfig cfg;
  ModuleGraph g = build_graph(cfg, 3);
  DCNet net(g);
  std::mt19937_64 rng(3);
  const ForwardOutputs out = net.infer(random_tensor(Shape{2, 3, 64, 64}, rng, 0.0f, 1.0f));
  EXPECT_EQ(out.count(), 13u);
  EXPECT_EQ(out.enc1.size(), 4u);
  EXPECT_EQ(out.enc2.size(), 4u);
  EXPECT_EQ(out.dec.size(), 5u);
  for (const auto* group : {&out.enc1, &out.enc2, &out.dec})
    for (const Tensor& m : *group) {
      ASSERT_EQ(m.shape(), (Shape{2, 1, 64, 64}));
      for (float v : m.span()) {
        ASSERT_GT(v, 0.0f);
        ASSERT_LT(v, 1.0f);
      }
    }
  EXPECT_EQ(&out.sup1(), &out.dec.front());
}

TEST(DCNet, ChannelBookkeeping) {
  const DCNetConfig cfg;
  ModuleGraph g = build_graph(cfg, 4);
  DCNet net(g);
  const ForwardOutputs out = net.infer(Tensor(Shape{1, 3, 64, 64}, 0.5f));
  ASSERT_EQ(out.features.size(), 4u);
  for (std::int64_t e = 1; e <= 4; ++e) {
    const Shape s = out.features[static_cast<std::size_t>(e - 1)].shape();
    EXPECT_EQ(s.c, 2 * cfg.widths[static_cast<std::size_t>(e - 1)]);
    EXPECT_EQ(s.h, 64 >> e);
  }
  for (std::int64_t n = 1; n <= 5; ++n) {
    const std::int64_t width = cfg.widths[static_cast<std::size_t>(std::min<std::int64_t>(n, 4) - 1)];
    EXPECT_EQ(cfg.decoder_out(n), width);
    const std::int64_t in = n == 5 ? 2 * cfg.widths.back() : 2 * width + cfg.decoder_out(n + 1);
    EXPECT_EQ(cfg.decoder_in(n), in);
    const Parameter& input_conv = g.params.at("dec.stage" + std::to_string(n) + ".input.conv.weight");
    EXPECT_EQ(input_conv.value().shape().c, in) << "stage " << n;
  }
}

TEST(DCNet, ImageSizeMismatchThrows) {
  ModuleGraph g = build_graph(small_config(), 5);
  DCNet net(g);
  EXPECT_THROW(net.infer(Tensor(Shape{1, 3, 32, 16})), InvalidArgument);
  EXPECT_THROW(net.infer(Tensor(Shape{1, 1, 16, 16})), InvalidArgument);
}

// Random image with one filled rectangle as the salient region.
std::vector<TrainSample> toy_samples(int count, std::int64_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> corner(1, size / 2 - 1), extent(size / 4, size / 2);
  std::vector<TrainSample> out;
  for (int i = 0; i < count; ++i) {
    Tensor mask(Shape{1, 1, size, size});
    const std::int64_t y0 = corner(rng), x0 = corner(rng), h = extent(rng), w = extent(rng);
    for (std::int64_t y = y0; y < y0 + h; ++y)
      for (std::int64_t x = x0; x < x0 + w; ++x) mask.at(0, 0, y, x) = 1.0f;
    Tensor image = random_tensor(Shape{1, 3, size, size}, rng, 0.0f, 0.3f);
    for (std::int64_t i = 0; i < mask.numel(); ++i)
      if (mask[i] > 0) image[i] += 0.6f;
    out.push_back(make_train_sample(image, mask));
  }
  return out;
}

TEST(Training, ZeroLearningRateLeavesParameters) {
  ModuleGraph g = build_graph(small_config(), 6);
  const ModuleGraph before = g.clone();
  DCNet net(g);
  const std::vector<TrainSample> data = toy_samples(2, 16, 6);
  TrainConfig cfg;
  cfg.opt.learning_rate = 0.0f;
  const LossReport r = train_step(net, make_batch(data), cfg);
  EXPECT_TRUE(std::isfinite(r.total));
  for (const Parameter* p : g.params.all())
    if (p->trainable) EXPECT_EQ(p->value().values(), before.params.at(p->name).value().values()) << p->name;
}

TEST(Training, ReportCoversEveryMap) {
  ModuleGraph g = build_graph(small_config(), 7);
  DCNet net(g);
  const LossReport r = train_step(net, make_batch(toy_samples(1, 16, 7)), TrainConfig{});
  EXPECT_EQ(r.l1.size(), 2u);
  EXPECT_EQ(r.l2.size(), 2u);
  EXPECT_EQ(r.l.size(), 3u);
}

TEST(Training, AllZeroWeightsGiveZeroLoss) {
  ModuleGraph g = build_graph(small_config(), 8);
  DCNet net(g);
  const Batch b = make_batch(toy_samples(2, 16, 8));
  ag::Tape tape;
  const ForwardVars out = net.forward(tape, ag::constant(b.images), ForwardOptions{true, false});
  LossWeights zero{{0, 0}, {0, 0}, {0, 0, 0}};
  const LossResult loss = total_loss(tape, out.enc1, out.enc2, out.dec, b.saliency, b.aux1, b.aux2, zero);
  EXPECT_EQ(loss.report.total, 0.0);
  EXPECT_EQ(loss.total->value.item(), 0.0f);
}

TEST(Training, NonFiniteLossThrowsDiverged) {
  ModuleGraph g = build_graph(small_config(), 9);
  DCNet net(g);
  g.params.at("dec.side1.weight").value().fill(std::numeric_limits<float>::quiet_NaN());
  const Tensor before = g.params.at("enc1.input.conv.weight").value();
  EXPECT_THROW(train_step(net, make_batch(toy_samples(1, 16, 9)), TrainConfig{}), TrainingDiverged);
  EXPECT_EQ(g.params.at("enc1.input.conv.weight").value().values(), before.values());
}

// The weighted loss recomputed in double from the side maps; the fp32 total
// is too coarse to difference at step 1e-3.
double loss_in_double(const ForwardVars& out, const Batch& b) {
  double total = 0.0;
  for (std::size_t e = 0; e < out.enc1.size(); ++e)
    total += bce(out.enc1[e]->value, b.aux1, Reduction::kMean) + bce(out.enc2[e]->value, b.aux2, Reduction::kMean);
  for (const ag::Var& d : out.dec)
    total += bce(d->value, b.saliency, Reduction::kMean) + iou_loss(d->value, b.saliency, Reduction::kMean);
  return total;
}

// Swaps one parameter's variable (or the images) for the grad_check input.
ag::GradCheckReport check_parameter(DCNet& net, Parameter& p, const Batch& batch, bool wrt_image = false) {
  const ag::Var saved = p.var;
  const auto run = [&](ag::Tape& tape, const ag::Var& x) {
    ag::Var images = ag::constant(batch.images);
    if (wrt_image)
      images = x;
    else
      p.var = x;
    // Eval-mode BN: in train mode a first-layer weight moves every batch
    // statistic and the loss is kinked every few 1e-4, below what fp32
    // central differences resolve. Train-mode BN gradients are checked per
    // op and per block.
    ForwardVars out = net.forward(tape, images, ForwardOptions{false, false});
    p.var = saved;
    return out;
  };
  const auto fn = [&](ag::Tape& tape, const ag::Var& x) {
    const ForwardVars out = run(tape, x);
    const LossWeights w = LossWeights::ones(out.enc1.size(), out.dec.size());
    return total_loss(tape, out.enc1, out.enc2, out.dec, batch.saliency, batch.aux1, batch.aux2, w, Reduction::kMean)
        .total;
  };
  const auto value = [&](const Tensor& in) {
    ag::Tape off(false);
    return loss_in_double(run(off, ag::constant(in)), batch);
  };
  ag::GradCheckOptions opts;
  opts.max_checks = 24;
  return ag::grad_check(fn, wrt_image ? batch.images : p.value(), value, opts);
}

TEST(Training, LossGradientMatchesFiniteDifferences) {
  ModuleGraph g = build_graph(small_config(), 10);
  DCNet net(g);
  const Batch batch = make_batch(toy_samples(2, 16, 10));
  for (const char* name : {"enc1.input.conv.weight", "enc2.stage2.conv1.conv.weight", "enc1.side1.bias",
                           "enc2.stage1.conv2.bn.gamma", "dec.stage3.fuse.conv.weight", "dec.stage1.input.bn.beta",
                           "dec.side2.weight", "dec.stage2.l2_3_3.conv.weight"}) {
    const ag::GradCheckReport r = check_parameter(net, g.params.at(name), batch);
    EXPECT_TRUE(r.passed) << name << " rel " << r.max_rel_error << " kinks " << r.kinks;
  }
  const ag::GradCheckReport img = check_parameter(net, g.params.at("dec.side1.bias"), batch, true);
  EXPECT_TRUE(img.passed) << "image rel " << img.max_rel_error;
}

TEST(Training, ZeroIterationsGiveEmptyHistory) {
  ModuleGraph g = build_graph(small_config(), 11);
  DCNet net(g);
  const std::vector<TrainSample> data = toy_samples(1, 16, 11);
  EXPECT_TRUE(train_loop(net, data, 0, TrainConfig{}).empty());
}

TEST(Training, LoopIsDeterministic) {
  const std::vector<TrainSample> data = toy_samples(3, 16, 12);
  TrainConfig cfg;
  cfg.batch_size = 2;
  std::vector<double> runs[2];
  for (auto& run : runs) {
    ModuleGraph g = build_graph(small_config(), 12);
    DCNet net(g);
    run = train_loop(net, data, 4, cfg);
  }
  EXPECT_EQ(runs[0].size(), 4u);
  EXPECT_EQ(runs[0], runs[1]);
}

TEST(Training, CallbackCanStopEarly) {
  ModuleGraph g = build_graph(small_config(), 13);
  DCNet net(g);
  const std::vector<TrainSample> data = toy_samples(1, 16, 13);
  const auto history = train_loop(net, data, 10, TrainConfig{},
                                  [](std::int64_t it, const LossReport&) { return it < 2; });
  EXPECT_EQ(history.size(), 3u);
}

TEST(Training, TwoHundredStepsOnOneImageLowerTheLoss) {
  ModuleGraph g = build_graph(small_config(32), 14);
  DCNet net(g);
  const std::vector<TrainSample> data = to_train_samples(make_toy_images(1, 32, 14));
  const std::vector<double> history = train_loop(net, data, 200, TrainConfig{});
  ASSERT_EQ(history.size(), 200u);
  EXPECT_LT(history.back(), history.front());
  EXPECT_LT(history.back(), 0.5 * history.front());
}

}  // namespace
}  // namespace dcnet
