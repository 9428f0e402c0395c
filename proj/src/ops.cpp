// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dcnet/errors.hpp"
#include "dcnet/kernels.hpp"

namespace dcnet {

OpCounters& op_counters() {
  thread_local OpCounters counters;
  return counters;
}

namespace {

// Range of output positions o in [0, out) for which o*stride + offset lies in [0, extent).
inline void valid_range(std::int64_t out, std::int64_t stride, std::int64_t offset, std::int64_t extent,
                        std::int64_t& lo, std::int64_t& hi) {
  lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  const std::int64_t last = extent - 1 - offset;
  hi = last < 0 ? 0 : std::min(out, last / stride + 1);
  if (lo > hi) lo = hi;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!(a.shape() == b.shape()))
    throw InvalidArgument(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                          b.shape().str());
}

}  // namespace

// ---- convolution ----------------------------------------------------------

PatchMatrix unfold(const Tensor& input, const ConvSpec& spec) {
  const Shape& s = input.shape();
  if (s.c != spec.in_channels)
    throw InvalidArgument("unfold: input has " + std::to_string(s.c) + " channels, spec expects " +
                          std::to_string(spec.in_channels));
  spec.validate(s.h, s.w);
  ++op_counters().unfold_calls;

  PatchMatrix pm;
  pm.n = s.n;
  pm.out_h = spec.out_h(s.h);
  pm.out_w = spec.out_w(s.w);
  pm.rows = s.c * spec.kh * spec.kw;
  pm.cols = pm.out_h * pm.out_w;
  pm.data.assign(static_cast<std::size_t>(pm.n * pm.rows * pm.cols), 0.0f);

  for (std::int64_t b = 0; b < s.n; ++b) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      const float* plane = input.data() + (b * s.c + c) * s.plane();
      for (std::int64_t ky = 0; ky < spec.kh; ++ky) {
        for (std::int64_t kx = 0; kx < spec.kw; ++kx) {
          const std::int64_t row = (c * spec.kh + ky) * spec.kw + kx;
          float* dst = pm.data.data() + (b * pm.rows + row) * pm.cols;
          const std::int64_t xoff = kx * spec.dw - spec.pw;
          std::int64_t x0, x1;
          valid_range(pm.out_w, spec.sw, xoff, s.w, x0, x1);
          for (std::int64_t oy = 0; oy < pm.out_h; ++oy) {
            const std::int64_t iy = oy * spec.sh - spec.ph + ky * spec.dh;
            if (iy < 0 || iy >= s.h) continue;
            const float* src = plane + iy * s.w;
            float* drow = dst + oy * pm.out_w;
            if (spec.sw == 1) {
              if (x1 > x0) std::memcpy(drow + x0, src + x0 + xoff, sizeof(float) * (x1 - x0));
            } else {
              for (std::int64_t ox = x0; ox < x1; ++ox) drow[ox] = src[ox * spec.sw + xoff];
            }
          }
        }
      }
    }
  }
  return pm;
}

Tensor fold(const PatchMatrix& cols, const ConvSpec& spec, const Shape& input_shape) {
  const Shape& s = input_shape;
  if (s.c != spec.in_channels || cols.n != s.n || cols.rows != s.c * spec.kh * spec.kw ||
      cols.out_h != spec.out_h(s.h) || cols.out_w != spec.out_w(s.w))
    throw InvalidArgument("fold: patch matrix does not match spec and input shape " + s.str());
  Tensor out(s);
  for (std::int64_t b = 0; b < s.n; ++b) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      float* plane = out.data() + (b * s.c + c) * s.plane();
      for (std::int64_t ky = 0; ky < spec.kh; ++ky) {
        for (std::int64_t kx = 0; kx < spec.kw; ++kx) {
          const std::int64_t row = (c * spec.kh + ky) * spec.kw + kx;
          const float* src = cols.data.data() + (b * cols.rows + row) * cols.cols;
          const std::int64_t xoff = kx * spec.dw - spec.pw;
          std::int64_t x0, x1;
          valid_range(cols.out_w, spec.sw, xoff, s.w, x0, x1);
          for (std::int64_t oy = 0; oy < cols.out_h; ++oy) {
            const std::int64_t iy = oy * spec.sh - spec.ph + ky * spec.dh;
            if (iy < 0 || iy >= s.h) continue;
            float* drow = plane + iy * s.w;
            const float* srow = src + oy * cols.out_w;
            for (std::int64_t ox = x0; ox < x1; ++ox) drow[ox * spec.sw + xoff] += srow[ox];
          }
        }
      }
    }
  }
  return out;
}

void check_conv_params(const Tensor& weight, const Tensor* bias, const ConvSpec& spec) {
  spec.validate(spec.dh * (spec.kh - 1) + 1, spec.dw * (spec.kw - 1) + 1);
  if (!(weight.shape() == spec.weight_shape()))
    throw InvalidArgument("conv weight shape " + weight.shape().str() + " expected " +
                          spec.weight_shape().str());
  if (bias != nullptr && bias->numel() != spec.out_channels)
    throw InvalidArgument("conv bias has " + std::to_string(bias->numel()) + " elements, expected " +
                          std::to_string(spec.out_channels));
}

namespace detail {

void gemm_batch(std::int64_t m, std::int64_t n, std::int64_t k, std::span<const GemmItem> items,
                std::int64_t lda, std::int64_t ldb, std::int64_t ldc, bool accumulate) {
  ++op_counters().gemm_calls;
  const kernels::KernelTable& kt = kernels::active();
  for (const GemmItem& it : items) kt.gemm_nn(m, n, k, it.a, lda, it.b, ldb, it.c, ldc, accumulate);
}

}  // namespace detail

Tensor conv2d_from_patches(const PatchMatrix& cols, const Tensor& weight, const Tensor* bias,
                           const ConvSpec& spec) {
  check_conv_params(weight, bias, spec);
  const std::int64_t rows_g = spec.patch_rows_per_group();
  if (cols.rows != rows_g * spec.groups)
    throw InvalidArgument("conv2d: patch rows do not match weight");
  const std::int64_t out_g = spec.out_channels / spec.groups;
  const std::int64_t L = cols.cols;
  Tensor out(Shape{cols.n, spec.out_channels, cols.out_h, cols.out_w});

  std::vector<detail::GemmItem> items;
  items.reserve(static_cast<std::size_t>(cols.n * spec.groups));
  for (std::int64_t b = 0; b < cols.n; ++b)
    for (std::int64_t g = 0; g < spec.groups; ++g)
      items.push_back({weight.data() + g * out_g * rows_g,
                       cols.data.data() + (b * cols.rows + g * rows_g) * L,
                       out.data() + (b * spec.out_channels + g * out_g) * L});
  detail::gemm_batch(out_g, L, rows_g, items, rows_g, L, L);

  if (bias != nullptr) {
    for (std::int64_t b = 0; b < cols.n; ++b)
      for (std::int64_t o = 0; o < spec.out_channels; ++o) {
        float* p = out.data() + (b * spec.out_channels + o) * L;
        const float bv = (*bias)[o];
        for (std::int64_t i = 0; i < L; ++i) p[i] += bv;
      }
  }
  return out;
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor* bias, const ConvSpec& spec) {
  check_conv_params(weight, bias, spec);
  return conv2d_from_patches(unfold(input, spec), weight, bias, spec);
}

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& weight, const ConvSpec& spec,
                         const Shape& input_shape) {
  const std::int64_t rows_g = spec.patch_rows_per_group();
  const std::int64_t out_g = spec.out_channels / spec.groups;
  const Shape& go = grad_out.shape();
  const std::int64_t L = go.h * go.w;

  // W_g^T per group: (rows_g × out_g)
  std::vector<float> wt(static_cast<std::size_t>(spec.groups * rows_g * out_g));
  for (std::int64_t g = 0; g < spec.groups; ++g)
    for (std::int64_t o = 0; o < out_g; ++o)
      for (std::int64_t r = 0; r < rows_g; ++r)
        wt[(g * rows_g + r) * out_g + o] = weight[(g * out_g + o) * rows_g + r];

  PatchMatrix dcols;
  dcols.n = go.n;
  dcols.rows = rows_g * spec.groups;
  dcols.cols = L;
  dcols.out_h = go.h;
  dcols.out_w = go.w;
  dcols.data.assign(static_cast<std::size_t>(dcols.n * dcols.rows * L), 0.0f);

  std::vector<detail::GemmItem> items;
  for (std::int64_t b = 0; b < go.n; ++b)
    for (std::int64_t g = 0; g < spec.groups; ++g)
      items.push_back({wt.data() + g * rows_g * out_g,
                       grad_out.data() + (b * spec.out_channels + g * out_g) * L,
                       dcols.data.data() + (b * dcols.rows + g * rows_g) * L});
  detail::gemm_batch(rows_g, L, out_g, items, out_g, L, L);
  return fold(dcols, spec, input_shape);
}

void conv2d_grad_weight(const Tensor& grad_out, const PatchMatrix& cols, const ConvSpec& spec,
                        Tensor& grad_weight) {
  const std::int64_t rows_g = spec.patch_rows_per_group();
  const std::int64_t out_g = spec.out_channels / spec.groups;
  const std::int64_t L = cols.cols;
  const kernels::KernelTable& kt = kernels::active();
  ++op_counters().gemm_calls;
  for (std::int64_t b = 0; b < cols.n; ++b)
    for (std::int64_t g = 0; g < spec.groups; ++g)
      kt.gemm_nt(out_g, rows_g, L, grad_out.data() + (b * spec.out_channels + g * out_g) * L, L,
                 cols.data.data() + (b * cols.rows + g * rows_g) * L, L,
                 grad_weight.data() + g * out_g * rows_g, rows_g, true);
}

void conv2d_grad_bias(const Tensor& grad_out, Tensor& grad_bias) {
  const Shape& s = grad_out.shape();
  for (std::int64_t o = 0; o < s.c; ++o) {
    double acc = 0.0;
    for (std::int64_t b = 0; b < s.n; ++b) {
      const float* p = grad_out.data() + (b * s.c + o) * s.plane();
      for (std::int64_t i = 0; i < s.plane(); ++i) acc += p[i];
    }
    grad_bias[o] += static_cast<float>(acc);
  }
}

// ---- matrix products ------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.n != 1 || sa.c != 1 || sb.n != 1 || sb.c != 1)
    throw InvalidArgument("matmul expects (1,1,rows,cols) matrices");
  if (sa.w != sb.h)
    throw InvalidArgument("matmul inner dimension mismatch " + sa.str() + " x " + sb.str());
  Tensor c(Shape{1, 1, sa.h, sb.w});
  const detail::GemmItem item{a.data(), b.data(), c.data()};
  detail::gemm_batch(sa.h, sb.w, sa.w, std::span(&item, 1), sa.w, sb.w, sb.w);
  return c;
}

Tensor batched_matmul(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.c != 1 || sb.c != 1) throw InvalidArgument("batched_matmul expects (B,1,rows,cols)");
  if (sa.n != sb.n) throw InvalidArgument("batched_matmul batch count mismatch");
  if (sa.w != sb.h)
    throw InvalidArgument("batched_matmul inner dimension mismatch " + sa.str() + " x " + sb.str());
  Tensor c(Shape{sa.n, 1, sa.h, sb.w});
  std::vector<detail::GemmItem> items;
  for (std::int64_t i = 0; i < sa.n; ++i)
    items.push_back({a.data() + i * sa.h * sa.w, b.data() + i * sb.h * sb.w, c.data() + i * sa.h * sb.w});
  detail::gemm_batch(sa.h, sb.w, sa.w, items, sa.w, sb.w, sb.w);
  return c;
}

// ---- resampling and pooling ----------------------------------------------

namespace {

struct Lerp {
  std::int64_t i0, i1;
  float w0, w1;
};

// align_corners = false source coordinates; negative coordinates clamp to 0.
std::vector<Lerp> lerp_table(std::int64_t in, std::int64_t out) {
  std::vector<Lerp> t(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::int64_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    std::int64_t i0 = static_cast<std::int64_t>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    const std::int64_t i1 = std::min(i0 + 1, in - 1);
    const double frac = src - static_cast<double>(i0);
    t[o] = Lerp{i0, i1, static_cast<float>(1.0 - frac), static_cast<float>(frac)};
  }
  return t;
}

}  // namespace

Tensor bilinear_resize(const Tensor& input, std::int64_t out_h, std::int64_t out_w) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("bilinear_resize: target size must be >= 1");
  const Shape& s = input.shape();
  if (s.h < 1 || s.w < 1) throw InvalidArgument("bilinear_resize: empty input");
  if (s.h == out_h && s.w == out_w) return input;
  const auto ty = lerp_table(s.h, out_h);
  const auto tx = lerp_table(s.w, out_w);
  Tensor out(Shape{s.n, s.c, out_h, out_w});
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    const float* src = input.data() + p * s.plane();
    float* dst = out.data() + p * out_h * out_w;
    for (std::int64_t y = 0; y < out_h; ++y) {
      const Lerp& ly = ty[y];
      const float* r0 = src + ly.i0 * s.w;
      const float* r1 = src + ly.i1 * s.w;
      for (std::int64_t x = 0; x < out_w; ++x) {
        const Lerp& lx = tx[x];
        dst[y * out_w + x] = ly.w0 * (lx.w0 * r0[lx.i0] + lx.w1 * r0[lx.i1]) +
                             ly.w1 * (lx.w0 * r1[lx.i0] + lx.w1 * r1[lx.i1]);
      }
    }
  }
  return out;
}

Tensor bilinear_resize_backward(const Tensor& grad_out, const Shape& input_shape) {
  const Shape& g = grad_out.shape();
  const Shape& s = input_shape;
  if (g.n != s.n || g.c != s.c) throw InvalidArgument("bilinear_resize_backward: shape mismatch");
  if (g.h == s.h && g.w == s.w) return grad_out;
  const auto ty = lerp_table(s.h, g.h);
  const auto tx = lerp_table(s.w, g.w);
  Tensor out(s);
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    const float* src = grad_out.data() + p * g.h * g.w;
    float* dst = out.data() + p * s.plane();
    for (std::int64_t y = 0; y < g.h; ++y) {
      const Lerp& ly = ty[y];
      for (std::int64_t x = 0; x < g.w; ++x) {
        const Lerp& lx = tx[x];
        const float v = src[y * g.w + x];
        dst[ly.i0 * s.w + lx.i0] += ly.w0 * lx.w0 * v;
        dst[ly.i0 * s.w + lx.i1] += ly.w0 * lx.w1 * v;
        dst[ly.i1 * s.w + lx.i0] += ly.w1 * lx.w0 * v;
        dst[ly.i1 * s.w + lx.i1] += ly.w1 * lx.w1 * v;
      }
    }
  }
  return out;
}

namespace {
void check_pool(const Shape& s, std::int64_t kernel, std::int64_t stride) {
  if (kernel < 1 || stride < 1) throw InvalidArgument("pool kernel and stride must be >= 1");
  if (s.h < kernel || s.w < kernel)
    throw InvalidArgument("pool kernel " + std::to_string(kernel) + " larger than input " + s.str());
}
}  // namespace

MaxPoolResult maxpool2d_with_indices(const Tensor& input, std::int64_t kernel, std::int64_t stride) {
  const Shape& s = input.shape();
  check_pool(s, kernel, stride);
  const std::int64_t oh = (s.h - kernel) / stride + 1;
  const std::int64_t ow = (s.w - kernel) / stride + 1;
  MaxPoolResult r{Tensor(Shape{s.n, s.c, oh, ow}), {}};
  r.argmax.resize(static_cast<std::size_t>(r.out.numel()));
  std::int64_t o = 0;
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    const std::int64_t base = p * s.plane();
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < ow; ++x, ++o) {
        std::int64_t best = base + (y * stride) * s.w + x * stride;
        float bv = input[best];
        for (std::int64_t ky = 0; ky < kernel; ++ky)
          for (std::int64_t kx = 0; kx < kernel; ++kx) {
            const std::int64_t idx = base + (y * stride + ky) * s.w + x * stride + kx;
            if (input[idx] > bv) {  // strict: first maximum in row-major scan wins ties
              bv = input[idx];
              best = idx;
            }
          }
        r.out[o] = bv;
        r.argmax[o] = best;
      }
  }
  return r;
}

Tensor maxpool2d(const Tensor& input, std::int64_t kernel, std::int64_t stride) {
  return maxpool2d_with_indices(input, kernel, stride).out;
}

Tensor avgpool2d(const Tensor& input, std::int64_t kernel, std::int64_t stride) {
  const Shape& s = input.shape();
  check_pool(s, kernel, stride);
  const std::int64_t oh = (s.h - kernel) / stride + 1;
  const std::int64_t ow = (s.w - kernel) / stride + 1;
  Tensor out(Shape{s.n, s.c, oh, ow});
  const double inv = 1.0 / static_cast<double>(kernel * kernel);
  std::int64_t o = 0;
  for (std::int64_t p = 0; p < s.n * s.c; ++p) {
    const float* plane = input.data() + p * s.plane();
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < ow; ++x, ++o) {
        double acc = 0.0;
        for (std::int64_t ky = 0; ky < kernel; ++ky)
          for (std::int64_t kx = 0; kx < kernel; ++kx) acc += plane[(y * stride + ky) * s.w + x * stride + kx];
        out[o] = static_cast<float>(acc * inv);
      }
  }
  return out;
}

Tensor avgpool2d_backward(const Tensor& grad_out, const Shape& input_shape, std::int64_t kernel,
                          std::int64_t stride) {
  const Shape& g = grad_out.shape();
  Tensor out(input_shape);
  const float inv = 1.0f / static_cast<float>(kernel * kernel);
  std::int64_t o = 0;
  for (std::int64_t p = 0; p < g.n * g.c; ++p) {
    float* plane = out.data() + p * input_shape.plane();
    for (std::int64_t y = 0; y < g.h; ++y)
      for (std::int64_t x = 0; x < g.w; ++x, ++o) {
        const float v = grad_out[o] * inv;
        for (std::int64_t ky = 0; ky < kernel; ++ky)
          for (std::int64_t kx = 0; kx < kernel; ++kx) plane[(y * stride + ky) * input_shape.w + x * stride + kx] += v;
      }
  }
  return out;
}

// ---- pointwise ------------------------------------------------------------

Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  kernels::active().relu(x.numel(), x.data(), out.data());
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const float v = x[i];
    // split by sign so exp never overflows
    if (v >= 0.0f) {
      out[i] = 1.0f / (1.0f + std::exp(-v));
    } else {
      const float e = std::exp(v);
      out[i] = e / (1.0f + e);
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  kernels::active().axpy(b.numel(), 1.0f, b.data(), out.data());
  return out;
}

Tensor scale(const Tensor& x, float s) {
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] * s;
  return out;
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw InvalidArgument("concat: no inputs");
  const Shape& s0 = parts.front()->shape();
  std::int64_t c = 0;
  for (const Tensor* t : parts) {
    const Shape& s = t->shape();
    if (s.n != s0.n || s.h != s0.h || s.w != s0.w)
      throw InvalidArgument("concat: mismatched n/h/w " + s.str() + " vs " + s0.str());
    c += s.c;
  }
  Tensor out(Shape{s0.n, c, s0.h, s0.w});
  float* dst = out.data();
  for (std::int64_t b = 0; b < s0.n; ++b)
    for (const Tensor* t : parts) {
      const std::int64_t chunk = t->shape().c * s0.plane();
      std::memcpy(dst, t->data() + b * chunk, sizeof(float) * chunk);
      dst += chunk;
    }
  return out;
}

Tensor concat_channels(std::initializer_list<const Tensor*> parts) {
  return concat_channels(std::span<const Tensor* const>(parts.begin(), parts.size()));
}

Tensor slice_channels(const Tensor& x, std::int64_t begin, std::int64_t count) {
  const Shape& s = x.shape();
  if (begin < 0 || count < 0 || begin + count > s.c) throw InvalidArgument("slice_channels out of range");
  Tensor out(Shape{s.n, count, s.h, s.w});
  for (std::int64_t b = 0; b < s.n; ++b)
    std::memcpy(out.data() + b * count * s.plane(), x.data() + (b * s.c + begin) * s.plane(),
                sizeof(float) * count * s.plane());
  return out;
}

double sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.span()) acc += v;
  return acc;
}

// ---- batch normalization --------------------------------------------------

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                 Tensor& running_var, float eps, BnMode mode, float momentum, BatchNormStats* stats_out) {
  const Shape& s = x.shape();
  if (gamma.numel() != s.c || beta.numel() != s.c || running_mean.numel() != s.c ||
      running_var.numel() != s.c)
    throw InvalidArgument("batchnorm: parameter vectors must have " + std::to_string(s.c) + " elements");
  if (!(eps > 0.0f)) throw InvalidArgument("batchnorm: eps must be positive");

  BatchNormStats stats;
  stats.mean.resize(static_cast<std::size_t>(s.c));
  stats.inv_std.resize(static_cast<std::size_t>(s.c));
  const std::int64_t count = s.n * s.plane();
  for (std::int64_t c = 0; c < s.c; ++c) {
    if (mode == BnMode::kEval) {
      stats.mean[c] = running_mean[c];
      stats.inv_std[c] = 1.0 / std::sqrt(static_cast<double>(running_var[c]) + eps);
      continue;
    }
    double acc = 0.0;
    for (std::int64_t b = 0; b < s.n; ++b) {
      const float* p = x.data() + (b * s.c + c) * s.plane();
      for (std::int64_t i = 0; i < s.plane(); ++i) acc += p[i];
    }
    const double mean = acc / static_cast<double>(count);
    double sq = 0.0;
    for (std::int64_t b = 0; b < s.n; ++b) {
      const float* p = x.data() + (b * s.c + c) * s.plane();
      for (std::int64_t i = 0; i < s.plane(); ++i) {
        const double d = p[i] - mean;
        sq += d * d;
      }
    }
    const double var = sq / static_cast<double>(count);
    const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
    stats.mean[c] = mean;
    stats.inv_std[c] = 1.0 / std::sqrt(var + eps);
    running_mean[c] = static_cast<float>((1.0 - momentum) * running_mean[c] + momentum * mean);
    running_var[c] = static_cast<float>((1.0 - momentum) * running_var[c] + momentum * unbiased);
  }

  Tensor out(s);
  for (std::int64_t b = 0; b < s.n; ++b)
    for (std::int64_t c = 0; c < s.c; ++c) {
      const double scale_c = stats.inv_std[c] * gamma[c];
      const double shift = beta[c] - stats.mean[c] * scale_c;
      const float* p = x.data() + (b * s.c + c) * s.plane();
      float* q = out.data() + (b * s.c + c) * s.plane();
      for (std::int64_t i = 0; i < s.plane(); ++i) q[i] = static_cast<float>(p[i] * scale_c + shift);
    }
  if (stats_out != nullptr) *stats_out = std::move(stats);
  return out;
}

}  // namespace dcnet
