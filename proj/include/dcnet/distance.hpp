// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Distance transforms over row-major h×w binary grids (nonzero = set).

#pragma once

#include <cstdint>
#include <vector>

namespace dcnet {

using Grid = std::vector<std::uint8_t>;

/// Chebyshev distance from every set pixel to the nearest unset pixel, where
/// everything outside the image counts as unset. Unset pixels get 0.
std::vector<std::int32_t> chebyshev_to_background(const Grid& mask, std::int64_t h, std::int64_t w);

/// Squared Euclidean distance from every pixel to the nearest set pixel of
/// `feature` (0 on set pixels, +inf everywhere when nothing is set).
std::vector<double> squared_edt(const Grid& feature, std::int64_t h, std::int64_t w);

/// Euclidean distance from every set pixel to the nearest unset pixel, with the
/// image exterior unset. Unset pixels get 0.
std::vector<double> euclidean_to_background(const Grid& mask, std::int64_t h, std::int64_t w);

/// Row-major index of the nearest set pixel of `feature` for every pixel. Among
/// equally distant candidates the smallest index wins. -1 when nothing is set.
std::vector<std::int64_t> nearest_feature_index(const Grid& feature, std::int64_t h, std::int64_t w);

}  // namespace dcnet
