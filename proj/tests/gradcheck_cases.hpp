// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Shared finite-difference cases: one entry per (op, shape) of the sweep, and
// parameter perturbations that move batchnorm away from the identity.

#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dcnet/autograd.hpp"
#include "dcnet/params.hpp"
#include "oracles.hpp"

namespace dcnet::testing {

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Non-trivial eval-mode statistics so BN is not the identity.
inline void randomize_bn(ParamStore& store, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> pos(0.5f, 1.5f), sym(-0.3f, 0.3f);
  for (Parameter* p : store.all()) {
    const bool scale_like = ends_with(p->name, ".gamma") || ends_with(p->name, ".running_var");
    const bool shift_like = ends_with(p->name, ".beta") || ends_with(p->name, ".running_mean") ||
                            ends_with(p->name, ".bias");
    if (scale_like)
      for (float& v : p->value().span()) v = pos(rng);
    else if (shift_like)
      for (float& v : p->value().span()) v = sym(rng);
  }
}

constexpr int kSweepShapes = 20;

struct OpCase {
  std::string name;
  Shape shape;
  ag::TensorFn fn;
  // Positive inputs away from kinks (relu, max ties) keep central differences valid.
  bool kink_safe = false;
  // Scalar fp32 outputs round at ~1e-7 relative; a wider step keeps that below tolerance.
  double step = 1e-3;
};

// Magnitudes 0.2 + 0.01·k in shuffled order with random signs: no value within
// two steps of zero or of any other value, so relu and max stay on one side.
inline Tensor kink_free(const Shape& shape, std::mt19937_64& rng) {
  Tensor t(shape);
  std::vector<std::int64_t> rank(static_cast<std::size_t>(t.numel()));
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rng);
  std::bernoulli_distribution sign(0.5);
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t[i] = (sign(rng) ? 1.0f : -1.0f) * (0.2f + 0.01f * static_cast<float>(rank[static_cast<std::size_t>(i)]));
  return t;
}

inline std::vector<OpCase> op_cases() {
  std::vector<OpCase> cases;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> nd(1, 3), cd(1, 4), hd(4, 8);
  std::vector<Shape> shapes;
  for (int i = 0; i < kSweepShapes; ++i) shapes.push_back(Shape{nd(rng), cd(rng), hd(rng), hd(rng)});
  for (const Shape& sh : shapes) {
    const std::string tag = std::to_string(cases.size()) + "_" + std::to_string(sh.n) + "x" + std::to_string(sh.c) + "x" + std::to_string(sh.h) + "x" +
                            std::to_string(sh.w);
    const std::int64_t groups = sh.c % 2 == 0 ? 2 : 1;
    for (std::int64_t dil : {1, 2}) {
      const ConvSpec s = ConvSpec::square(sh.c, 2 * groups, 3, 1 + (dil == 1 && sh.h >= 6), dil, dil, groups);
      auto w = std::make_shared<Tensor>(random_tensor(s.weight_shape(), rng));
      auto b = std::make_shared<Tensor>(random_tensor(Shape{s.out_channels, 1, 1, 1}, rng));
      cases.push_back({"conv_input_d" + std::to_string(dil) + "_" + tag, sh,
                       [s, w, b](ag::Tape& t, const ag::Var& x) {
                         return ag::conv2d(t, x, ag::constant(*w), ag::constant(*b), s);
                       }});
      // Gradient with respect to the weight: the checked input is the weight.
      auto in = std::make_shared<Tensor>(random_tensor(sh, rng));
      cases.push_back({"conv_weight_d" + std::to_string(dil) + "_" + tag, s.weight_shape(),
                       [s, in, b](ag::Tape& t, const ag::Var& wv) {
                         return ag::conv2d(t, ag::constant(*in), wv, ag::constant(*b), s);
                       }});
      cases.push_back({"conv_bias_d" + std::to_string(dil) + "_" + tag, Shape{s.out_channels, 1, 1, 1},
                       [s, in, w](ag::Tape& t, const ag::Var& bv) {
                         return ag::conv2d(t, ag::constant(*in), ag::constant(*w), bv, s);
                       }});
    }
    cases.push_back({"relu_" + tag, sh, [](ag::Tape& t, const ag::Var& x) { return ag::relu(t, x); }, true});
    cases.push_back({"sigmoid_" + tag, sh, [](ag::Tape& t, const ag::Var& x) { return ag::sigmoid(t, x); }});
    cases.push_back({"scale_" + tag, sh, [](ag::Tape& t, const ag::Var& x) { return ag::scale(t, x, -1.7f); }});
    cases.push_back({"add_self_" + tag, sh, [](ag::Tape& t, const ag::Var& x) {
                       return ag::add(t, x, ag::sigmoid(t, x));
                     }});
    cases.push_back({"upsample_" + tag, sh, [sh](ag::Tape& t, const ag::Var& x) {
                       return ag::bilinear_resize(t, x, sh.h * 2 + 1, sh.w * 3);
                     }});
    cases.push_back({"downsample_" + tag, sh, [sh](ag::Tape& t, const ag::Var& x) {
                       return ag::bilinear_resize(t, x, (sh.h + 1) / 2, (sh.w + 2) / 3);
                     }});
    cases.push_back({"maxpool_" + tag, sh, [](ag::Tape& t, const ag::Var& x) { return ag::maxpool2d(t, x); }, true});
    cases.push_back({"avgpool_" + tag, sh, [](ag::Tape& t, const ag::Var& x) { return ag::avgpool2d(t, x, 2, 2); }});
    cases.push_back({"concat_slice_" + tag, sh, [sh](ag::Tape& t, const ag::Var& x) {
                       const ag::Var doubled = ag::concat_channels(t, {x, ag::scale(t, x, 2.0f), x});
                       return ag::slice_channels(t, doubled, 1, sh.c + 1);
                     }});
    cases.push_back({"sum_" + tag, sh,
                     [](ag::Tape& t, const ag::Var& x) {
                       // Centered terms keep the fp32 total small enough to difference.
                       const ag::Var half = ag::constant(Tensor::full(x->value.shape(), -0.5f));
                       return ag::sum(t, ag::add(t, ag::sigmoid(t, x), half));
                     },
                     false, 1e-2});
    if (sh.n * sh.h * sh.w > 1) {
      auto gamma = std::make_shared<Tensor>(random_tensor(Shape{sh.c, 1, 1, 1}, rng, 0.5f, 1.5f));
      auto beta = std::make_shared<Tensor>(random_tensor(Shape{sh.c, 1, 1, 1}, rng));
      cases.push_back({"bn_train_" + tag, sh, [sh, gamma, beta](ag::Tape& t, const ag::Var& x) {
                         Tensor rm = Tensor::vector(sh.c, 0.0f), rv = Tensor::vector(sh.c, 1.0f);
                         return ag::batchnorm(t, x, ag::constant(*gamma), ag::constant(*beta), rm, rv, 1e-5f,
                                              BnMode::kTrain);
                       }});
      auto x0 = std::make_shared<Tensor>(random_tensor(sh, rng));
      cases.push_back({"bn_gamma_" + tag, Shape{sh.c, 1, 1, 1}, [sh, x0, beta](ag::Tape& t, const ag::Var& g) {
                         Tensor rm = Tensor::vector(sh.c, 0.0f), rv = Tensor::vector(sh.c, 1.0f);
                         return ag::batchnorm(t, ag::constant(*x0), g, ag::constant(*beta), rm, rv, 1e-5f,
                                              BnMode::kTrain);
                       }});
      cases.push_back({"bn_eval_" + tag, sh, [sh, gamma, beta](ag::Tape& t, const ag::Var& x) {
                         Tensor rm = Tensor::vector(sh.c, 0.1f), rv = Tensor::vector(sh.c, 2.0f);
                         return ag::batchnorm(t, x, ag::constant(*gamma), ag::constant(*beta), rm, rv, 1e-5f,
                                              BnMode::kEval);
                       }});
    }
  }
  return cases;
}

}  // namespace dcnet::testing
