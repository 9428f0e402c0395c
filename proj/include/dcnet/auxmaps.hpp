// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Auxiliary supervision targets derived from a binary saliency mask. Masks are
// (1, 1, h, w) tensors holding exactly 0 or 1; the image exterior is background.

#pragma once

#include <cstdint>
#include <vector>

#include "dcnet/distance.hpp"
#include "dcnet/tensor.hpp"

namespace dcnet {

/// Throws InvalidArgument unless `mask` is (1, 1, h, w) with values in {0, 1}.
void check_binary_mask(const Tensor& mask);
/// value >= threshold -> 1, else 0.
Tensor binarize(const Tensor& t, float threshold = 0.5f);

Grid to_grid(const Tensor& mask);
Tensor from_grid(const Grid& g, std::int64_t h, std::int64_t w);

/// Salient pixels within Chebyshev distance `width` of the background.
Tensor edge_map(const Tensor& mask, std::int64_t width);

/// Cell size of the location map's coarse grid.
inline constexpr std::int64_t kLocationCell = 16;

/// Mean over 16×16 cells (cells cut by the image border average only their
/// in-image pixels), bilinear upsampling back to pixel resolution, threshold 0.5.
Tensor location_map(const Tensor& mask);

struct BodyDetail {
  Tensor body;
  Tensor detail;
};

/// body = mask·dist/max(dist) with dist the Euclidean distance to the
/// background, rounded to multiples of 2^-16 so that body + detail == mask
/// holds exactly in float; detail = mask − body.
BodyDetail body_detail(const Tensor& mask);

struct AuxMapSet {
  std::vector<Tensor> edges;  // widths 1..5
  Tensor location;
  Tensor body;
  Tensor detail;
};

AuxMapSet make_aux_maps(const Tensor& mask);

}  // namespace dcnet
