// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcnet/errors.hpp"

namespace dcnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check(const Grid& g, std::int64_t h, std::int64_t w) {
  if (h < 1 || w < 1 || static_cast<std::int64_t>(g.size()) != h * w)
    throw InvalidArgument("grid of " + std::to_string(g.size()) + " values is not " + std::to_string(h) + "x" +
                          std::to_string(w));
}

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) over one line.
void edt_1d(const double* f, std::int64_t n, double* d, std::vector<std::int64_t>& v, std::vector<double>& z) {
  std::int64_t k = 0;
  std::int64_t first = -1;
  for (std::int64_t q = 0; q < n; ++q)
    if (f[q] < kInf) {
      first = q;
      break;
    }
  if (first < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  v[0] = first;
  z[0] = -kInf;
  z[1] = kInf;
  for (std::int64_t q = first + 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    auto meet = [&](std::int64_t p) {
      return ((f[q] + static_cast<double>(q * q)) - (f[p] + static_cast<double>(p * p))) /
             (2.0 * static_cast<double>(q - p));
    };
    double s = meet(v[static_cast<std::size_t>(k)]);
    while (s <= z[static_cast<std::size_t>(k)]) s = meet(v[static_cast<std::size_t>(--k)]);
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  k = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < static_cast<double>(q)) ++k;
    const std::int64_t p = v[static_cast<std::size_t>(k)];
    d[q] = static_cast<double>((q - p) * (q - p)) + f[p];
  }
}

std::vector<double> edt_2d(std::vector<double> f, std::int64_t h, std::int64_t w) {
  const std::int64_t n = std::max(h, w);
  std::vector<std::int64_t> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1), col(static_cast<std::size_t>(h)),
      out(static_cast<std::size_t>(n));
  for (std::int64_t x = 0; x < w; ++x) {
    for (std::int64_t y = 0; y < h; ++y) col[static_cast<std::size_t>(y)] = f[static_cast<std::size_t>(y * w + x)];
    edt_1d(col.data(), h, out.data(), v, z);
    for (std::int64_t y = 0; y < h; ++y) f[static_cast<std::size_t>(y * w + x)] = out[static_cast<std::size_t>(y)];
  }
  for (std::int64_t y = 0; y < h; ++y) {
    edt_1d(f.data() + y * w, w, out.data(), v, z);
    std::copy(out.begin(), out.begin() + w, f.begin() + y * w);
  }
  return f;
}

// Copy of `mask` with a one-pixel unset border.
Grid pad(const Grid& mask, std::int64_t h, std::int64_t w) {
  Grid p(static_cast<std::size_t>((h + 2) * (w + 2)), 0);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      p[static_cast<std::size_t>((y + 1) * (w + 2) + x + 1)] = mask[static_cast<std::size_t>(y * w + x)] ? 1 : 0;
  return p;
}

}  // namespace

std::vector<std::int32_t> chebyshev_to_background(const Grid& mask, std::int64_t h, std::int64_t w) {
  check(mask, h, w);
  const std::int64_t ph = h + 2, pw = w + 2;
  const Grid p = pad(mask, h, w);
  constexpr std::int32_t kBig = std::numeric_limits<std::int32_t>::max() / 2;
  std::vector<std::int32_t> d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = p[i] ? kBig : 0;
  auto at = [&](std::int64_t y, std::int64_t x) -> std::int32_t& { return d[static_cast<std::size_t>(y * pw + x)]; };
  // Forward pass: neighbours above and to the left; backward pass: below and to the right.
  for (std::int64_t y = 1; y < ph - 1; ++y)
    for (std::int64_t x = 1; x < pw - 1; ++x) {
      std::int32_t& c = at(y, x);
      if (c == 0) continue;
      c = std::min({c, at(y - 1, x - 1) + 1, at(y - 1, x) + 1, at(y - 1, x + 1) + 1, at(y, x - 1) + 1});
    }
  for (std::int64_t y = ph - 2; y >= 1; --y)
    for (std::int64_t x = pw - 2; x >= 1; --x) {
      std::int32_t& c = at(y, x);
      if (c == 0) continue;
      c = std::min({c, at(y + 1, x + 1) + 1, at(y + 1, x) + 1, at(y + 1, x - 1) + 1, at(y, x + 1) + 1});
    }
  std::vector<std::int32_t> out(static_cast<std::size_t>(h * w));
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) out[static_cast<std::size_t>(y * w + x)] = at(y + 1, x + 1);
  return out;
}

std::vector<double> squared_edt(const Grid& feature, std::int64_t h, std::int64_t w) {
  check(feature, h, w);
  std::vector<double> f(feature.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = feature[i] ? 0.0 : kInf;
  return edt_2d(std::move(f), h, w);
}

std::vector<double> euclidean_to_background(const Grid& mask, std::int64_t h, std::int64_t w) {
  check(mask, h, w);
  Grid bg = pad(mask, h, w);
  for (auto& v : bg) v = v ? 0 : 1;
  const std::vector<double> d2 = squared_edt(bg, h + 2, w + 2);
  std::vector<double> out(static_cast<std::size_t>(h * w));
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      out[static_cast<std::size_t>(y * w + x)] = std::sqrt(d2[static_cast<std::size_t>((y + 1) * (w + 2) + x + 1)]);
  return out;
}

std::vector<std::int64_t> nearest_feature_index(const Grid& feature, std::int64_t h, std::int64_t w) {
  const std::vector<double> d2 = squared_edt(feature, h, w);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(h * w), -1);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      const double target = d2[static_cast<std::size_t>(y * w + x)];
      if (target == kInf) continue;
      const auto r = static_cast<std::int64_t>(std::ceil(std::sqrt(target)));
      // Scan candidates in row-major order; the first at exactly the minimum distance wins.
      for (std::int64_t yy = std::max<std::int64_t>(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
        const std::int64_t dy = yy - y;
        bool found = false;
        for (std::int64_t xx = std::max<std::int64_t>(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          const std::int64_t dx = xx - x;
          if (feature[static_cast<std::size_t>(yy * w + xx)] && static_cast<double>(dy * dy + dx * dx) == target) {
            idx[static_cast<std::size_t>(y * w + x)] = yy * w + xx;
            found = true;
            break;
          }
        }
        if (found) break;
      }
    }
  return idx;
}

}  // namespace dcnet
