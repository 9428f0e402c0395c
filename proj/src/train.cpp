// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/train.hpp"

#include <cmath>
#include <cstring>

#include "dcnet/errors.hpp"

namespace dcnet {

namespace {

Tensor stack(std::span<const TrainSample> samples, Tensor TrainSample::*field) {
  const Shape one = (samples.front().*field).shape();
  if (one.n != 1) throw InvalidArgument("training samples must have n = 1");
  Tensor out(Shape{static_cast<std::int64_t>(samples.size()), one.c, one.h, one.w});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Tensor& t = samples[i].*field;
    if (!(t.shape() == one)) throw InvalidArgument("training samples differ in shape: " + t.shape().str());
    std::memcpy(out.data() + static_cast<std::int64_t>(i) * one.numel(), t.data(),
                sizeof(float) * static_cast<std::size_t>(one.numel()));
  }
  return out;
}

}  // namespace

Batch make_batch(std::span<const TrainSample> samples) {
  if (samples.empty()) throw InvalidArgument("empty batch");
  return Batch{stack(samples, &TrainSample::image), stack(samples, &TrainSample::saliency),
               stack(samples, &TrainSample::aux1), stack(samples, &TrainSample::aux2)};
}

LossReport train_step(DCNet& net, const Batch& batch, const TrainConfig& cfg) {
  cfg.opt.validate();
  const DCNetConfig& nc = net.config();
  const LossWeights weights = cfg.weights.value_or(
      LossWeights::ones(static_cast<std::size_t>(nc.encoder_stages), static_cast<std::size_t>(nc.decoder_stages)));

  ag::Tape tape(true);
  ForwardVars out = net.forward(tape, ag::constant(batch.images), ForwardOptions{true, false});
  LossResult loss = total_loss(tape, out.enc1, out.enc2, out.dec, batch.saliency, batch.aux1, batch.aux2,
                               weights, cfg.reduction);
  if (!std::isfinite(loss.report.total))
    throw TrainingDiverged("loss is " + std::to_string(loss.report.total));
  tape.backward(loss.total);
  std::vector<Parameter*> params = net.trainable();
  sgd_step(params, cfg.opt);
  net.invalidate_plans();
  return loss.report;
}

std::vector<double> train_loop(DCNet& net, std::span<const TrainSample> data, std::int64_t iterations,
                               const TrainConfig& cfg, const TrainCallback& callback) {
  if (iterations < 0) throw InvalidArgument("iterations must be >= 0");
  std::vector<double> history;
  if (iterations == 0) return history;
  if (data.empty()) throw InvalidArgument("empty training set");
  const std::size_t bs = cfg.batch_size <= 0 ? data.size()
                                             : std::min(data.size(), static_cast<std::size_t>(cfg.batch_size));
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < data.size(); start += bs)
    batches.push_back(make_batch(data.subspan(start, std::min(bs, data.size() - start))));
  for (std::int64_t it = 0; it < iterations; ++it) {
    LossReport rep = train_step(net, batches[static_cast<std::size_t>(it) % batches.size()], cfg);
    history.push_back(rep.total);
    if (callback && !callback(it, rep)) break;
  }
  return history;
}

}  // namespace dcnet
