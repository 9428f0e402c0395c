// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "dcnet/errors.hpp"
#include "dcnet/kernels.hpp"

namespace dcnet::ag {

Tensor& Node::grad_buffer() {
  if (grad.empty() && !value.empty()) grad = Tensor(value.shape());
  if (!(grad.shape() == value.shape())) grad = Tensor(value.shape());
  return grad;
}

void Node::accumulate(const Tensor& g) {
  Tensor& buf = grad_buffer();
  if (!(g.shape() == buf.shape()))
    throw InvalidArgument("gradient shape " + g.shape().str() + " does not match value " +
                          buf.shape().str());
  kernels::active().axpy(g.numel(), 1.0f, g.data(), buf.data());
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

bool needs_grad(const Var& v) { return v && v->requires_grad; }

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn fn) {
  auto out = std::make_shared<Node>();
  out->value = std::move(value);
  if (!enabled_) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return needs_grad(v); });
  if (!any) return out;
  out->requires_grad = true;
  records_.push_back(Record{std::move(inputs), out, std::move(fn)});
  return out;
}

void Tape::backward(const Var& loss) {
  if (!loss || !loss->value.is_scalar())
    throw InvalidArgument("backward: loss must be a scalar tensor");
  backward(loss, Tensor::full(loss->value.shape(), 1.0f));
}

void Tape::backward(const Var& output, const Tensor& seed) {
  if (!output) throw InvalidArgument("backward: null output");
  if (!(seed.shape() == output->value.shape()))
    throw InvalidArgument("backward: seed shape " + seed.shape().str() + " does not match output " +
                          output->value.shape().str());
  for (Record& r : records_) r.output->grad = Tensor();
  output->accumulate(seed);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->fn(it->output->grad);
  }
}

namespace {
inline void push_grad(const Var& v, const Tensor& g) {
  if (needs_grad(v)) v->accumulate(g);
}
}  // namespace

Var conv2d(Tape& tape, const Var& x, const Var& weight, const Var& bias, const ConvSpec& spec) {
  const Tensor* b = bias ? &bias->value : nullptr;
  check_conv_params(weight->value, b, spec);
  auto cols = std::make_shared<PatchMatrix>(unfold(x->value, spec));
  Tensor out = conv2d_from_patches(*cols, weight->value, b, spec);
  if (!tape.enabled()) return constant(std::move(out));
  const Shape in_shape = x->value.shape();
  return tape.record(std::move(out), {x, weight, bias}, [x, weight, bias, cols, spec, in_shape](const Tensor& g) {
    if (needs_grad(x)) x->accumulate(conv2d_grad_input(g, weight->value, spec, in_shape));
    if (needs_grad(weight)) conv2d_grad_weight(g, *cols, spec, weight->grad_buffer());
    if (needs_grad(bias)) conv2d_grad_bias(g, bias->grad_buffer());
  });
}

Var batchnorm(Tape& tape, const Var& x, const Var& gamma, const Var& beta, Tensor& running_mean,
              Tensor& running_var, float eps, BnMode mode, float momentum) {
  auto stats = std::make_shared<BatchNormStats>();
  Tensor out = dcnet::batchnorm(x->value, gamma->value, beta->value, running_mean, running_var, eps,
                                mode, momentum, stats.get());
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {x, gamma, beta}, [x, gamma, beta, stats, mode](const Tensor& g) {
    const Shape& s = x->value.shape();
    const double count = static_cast<double>(s.n * s.plane());
    Tensor dx(s);
    for (std::int64_t c = 0; c < s.c; ++c) {
      const double mean = stats->mean[c];
      const double istd = stats->inv_std[c];
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::int64_t b = 0; b < s.n; ++b) {
        const std::int64_t off = (b * s.c + c) * s.plane();
        for (std::int64_t i = 0; i < s.plane(); ++i) {
          const double dy = g[off + i];
          sum_dy += dy;
          sum_dy_xhat += dy * (x->value[off + i] - mean) * istd;
        }
      }
      if (needs_grad(gamma)) gamma->grad_buffer()[c] += static_cast<float>(sum_dy_xhat);
      if (needs_grad(beta)) beta->grad_buffer()[c] += static_cast<float>(sum_dy);
      if (!needs_grad(x)) continue;
      const double gscale = gamma->value[c] * istd;
      for (std::int64_t b = 0; b < s.n; ++b) {
        const std::int64_t off = (b * s.c + c) * s.plane();
        for (std::int64_t i = 0; i < s.plane(); ++i) {
          const double dy = g[off + i];
          if (mode == BnMode::kEval) {
            dx[off + i] = static_cast<float>(dy * gscale);
          } else {
            const double xhat = (x->value[off + i] - mean) * istd;
            dx[off + i] = static_cast<float>(gscale / count * (count * dy - sum_dy - xhat * sum_dy_xhat));
          }
        }
      }
    }
    if (needs_grad(x)) x->accumulate(dx);
  });
}

Var relu(Tape& tape, const Var& x) {
  Tensor out = dcnet::relu(x->value);
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {x}, [x](const Tensor& g) {
    Tensor dx(g.shape());
    for (std::int64_t i = 0; i < g.numel(); ++i) dx[i] = x->value[i] > 0.0f ? g[i] : 0.0f;
    x->accumulate(dx);
  });
}

Var sigmoid(Tape& tape, const Var& x) {
  Tensor out = dcnet::sigmoid(x->value);
  if (!tape.enabled()) return constant(std::move(out));
  auto y = std::make_shared<Tensor>(out);
  return tape.record(std::move(out), {x}, [x, y](const Tensor& g) {
    Tensor dx(g.shape());
    for (std::int64_t i = 0; i < g.numel(); ++i) {
      const float s = (*y)[i];
      dx[i] = g[i] * s * (1.0f - s);
    }
    x->accumulate(dx);
  });
}

Var add(Tape& tape, const Var& a, const Var& b) {
  Tensor out = dcnet::add(a->value, b->value);
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {a, b}, [a, b](const Tensor& g) {
    push_grad(a, g);
    push_grad(b, g);
  });
}

Var scale(Tape& tape, const Var& x, float s) {
  Tensor out = dcnet::scale(x->value, s);
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {x}, [x, s](const Tensor& g) { x->accumulate(dcnet::scale(g, s)); });
}

Var concat_channels(Tape& tape, const std::vector<Var>& parts) {
  std::vector<const Tensor*> values;
  values.reserve(parts.size());
  for (const Var& p : parts) values.push_back(&p->value);
  Tensor out = dcnet::concat_channels(std::span<const Tensor* const>(values));
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), parts, [parts](const Tensor& g) {
    std::int64_t begin = 0;
    for (const Var& p : parts) {
      const std::int64_t c = p->value.shape().c;
      if (needs_grad(p)) p->accumulate(dcnet::slice_channels(g, begin, c));
      begin += c;
    }
  });
}

Var slice_channels(Tape& tape, const Var& x, std::int64_t begin, std::int64_t count) {
  Tensor out = dcnet::slice_channels(x->value, begin, count);
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {x}, [x, begin, count](const Tensor& g) {
    const Shape& s = x->value.shape();
    Tensor& buf = x->grad_buffer();
    for (std::int64_t b = 0; b < s.n; ++b)
      for (std::int64_t c = 0; c < count; ++c)
        for (std::int64_t i = 0; i < s.plane(); ++i)
          buf[((b * s.c) + begin + c) * s.plane() + i] += g[((b * count) + c) * s.plane() + i];
  });
}

Var bilinear_resize(Tape& tape, const Var& x, std::int64_t out_h, std::int64_t out_w) {
  Tensor out = dcnet::bilinear_resize(x->value, out_h, out_w);
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {x}, [x](const Tensor& g) {
    x->accumulate(bilinear_resize_backward(g, x->value.shape()));
  });
}

Var maxpool2d(Tape& tape, const Var& x, std::int64_t kernel, std::int64_t stride) {
  MaxPoolResult r = maxpool2d_with_indices(x->value, kernel, stride);
  if (!tape.enabled()) return constant(std::move(r.out));
  auto argmax = std::make_shared<std::vector<std::int64_t>>(std::move(r.argmax));
  return tape.record(std::move(r.out), {x}, [x, argmax](const Tensor& g) {
    Tensor& buf = x->grad_buffer();
    for (std::int64_t i = 0; i < g.numel(); ++i) buf[(*argmax)[i]] += g[i];
  });
}

Var avgpool2d(Tape& tape, const Var& x, std::int64_t kernel, std::int64_t stride) {
  Tensor out = dcnet::avgpool2d(x->value, kernel, stride);
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {x}, [x, kernel, stride](const Tensor& g) {
    x->accumulate(avgpool2d_backward(g, x->value.shape(), kernel, stride));
  });
}

Var sum(Tape& tape, const Var& x) {
  Tensor out = Tensor::scalar(static_cast<float>(dcnet::sum(x->value)));
  if (!tape.enabled()) return constant(std::move(out));
  return tape.record(std::move(out), {x}, [x](const Tensor& g) {
    x->accumulate(Tensor::full(x->value.shape(), g[0]));
  });
}

// ---- gradient checking ----------------------------------------------------

namespace {

// Compares `analytic` against central differences of `evaluate` around `input`.
GradCheckReport compare_with_differences(const Tensor& analytic, const Tensor& input,
                                         const std::function<double(const Tensor&)>& evaluate,
                                         const GradCheckOptions& opts) {
  GradCheckReport rep;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(input.numel()));
  std::iota(idx.begin(), idx.end(), 0);
  if (opts.max_checks > 0 && opts.max_checks < input.numel()) {
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(opts.max_checks));
  }

  // The error bound is relative to ‖analytic‖∞ over the whole gradient, known
  // before any probe runs.
  double amax = 0.0;
  for (float v : analytic.span()) amax = std::max(amax, std::abs(static_cast<double>(v)));

  Tensor probe = input;
  auto central = [&](std::int64_t i, double step) {
    const float orig = probe[i];
    probe[i] = static_cast<float>(orig + step);
    const double hi_x = probe[i];
    const double fp = evaluate(probe);
    probe[i] = static_cast<float>(orig - step);
    const double lo_x = probe[i];
    const double fm = evaluate(probe);
    probe[i] = orig;
    return (fp - fm) / (hi_x - lo_x);
  };

  double nmax = 0.0, emax = 0.0;
  std::optional<double> f0;
  double scale = 1.0;
  auto bracketed = [&](std::int64_t i) {
    if (!f0) f0 = evaluate(input);
    const float orig = probe[i];
    probe[i] = static_cast<float>(orig + opts.step);
    const double hi_x = probe[i];
    const double right = (evaluate(probe) - *f0) / (hi_x - orig);
    probe[i] = static_cast<float>(orig - opts.step);
    const double lo_x = probe[i];
    const double left = (*f0 - evaluate(probe)) / (orig - lo_x);
    probe[i] = orig;
    const double slack = opts.tol * scale;
    const double a = analytic[i];
    return std::abs(right - left) > 2.0 * slack && a >= std::min(left, right) - slack &&
           a <= std::max(left, right) + slack;
  };
  std::vector<std::pair<std::int64_t, double>> misses;
  for (std::int64_t i : idx) {
    const double numeric = central(i, opts.step);
    const double a = analytic[i];
    if (!std::isfinite(numeric) || !std::isfinite(a)) {
      rep.non_finite = true;
      continue;
    }
    ++rep.checked;
    nmax = std::max(nmax, std::abs(numeric));
    misses.emplace_back(i, std::abs(a - numeric));
  }
  scale = std::max({amax, nmax, 1e-12});
  for (auto& [i, err] : misses) {
    double step = opts.step;
    for (int r = 0; r < opts.kink_retries && err > opts.tol * scale; ++r) {
      step *= 0.5;
      const double numeric = central(i, step);
      if (!std::isfinite(numeric)) break;
      const double e = std::abs(static_cast<double>(analytic[i]) - numeric);
      if (e <= opts.tol * scale) ++rep.retried;
      err = std::min(err, e);
    }
    if (err > opts.tol * scale && opts.accept_bracketed_kinks && bracketed(i)) {
      ++rep.kinks;
      err = 0.0;
    }
    emax = std::max(emax, err);
  }
  rep.max_abs_error = emax;
  rep.max_rel_error = emax / scale;
  rep.passed = !rep.non_finite && rep.max_rel_error <= opts.tol;
  return rep;
}

}  // namespace

GradCheckReport grad_check(const TensorFn& fn, const Tensor& input, const GradCheckOptions& opts) {
  Tape tape(true);
  Var x = leaf(input, true);
  Var y = fn(tape, x);
  Tensor weights(y->value.shape(), 1.0f);
  if (opts.random_projection) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    for (std::int64_t i = 0; i < weights.numel(); ++i) weights[i] = nd(rng);
  }
  tape.backward(y, weights);
  const Tensor analytic = x->grad.empty() ? Tensor(input.shape()) : x->grad;

  const auto evaluate = [&](const Tensor& in) {
    Tape off(false);
    Var out = fn(off, constant(in));
    double f = 0.0;
    for (std::int64_t i = 0; i < out->value.numel(); ++i)
      f += static_cast<double>(weights[i]) * static_cast<double>(out->value[i]);
    return f;
  };
  return compare_with_differences(analytic, input, evaluate, opts);
}

GradCheckReport grad_check(const TensorFn& fn, const Tensor& input, const ScalarFn& value,
                           const GradCheckOptions& opts) {
  Tape tape(true);
  Var x = leaf(input, true);
  Var y = fn(tape, x);
  if (y->value.numel() != 1) throw InvalidArgument("grad_check: scalar evaluator needs a scalar output");
  tape.backward(y);
  const Tensor analytic = x->grad.empty() ? Tensor(input.shape()) : x->grad;
  return compare_with_differences(analytic, input, value, opts);
}

}  // namespace dcnet::ag
