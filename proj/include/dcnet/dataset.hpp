// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Training data: the on-disk layout, target generation, and a synthetic
// rectangle dataset for smoke runs and tests.
//
// Directory layout: <dir>/images/<stem>.ppm and <dir>/masks/<stem>.pgm.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dcnet/train.hpp"

namespace dcnet {

/// Edge band width of the first encoder's target.
inline constexpr std::int64_t kTrainEdgeWidth = 4;

/// aux1 = edge band of width 4, aux2 = location map. `mask` is binarized at 0.5.
TrainSample make_train_sample(const Tensor& image, const Tensor& mask);

struct LabeledImage {
  std::string stem;
  Tensor image;  // (1, 3, h, w)
  Tensor mask;   // (1, 1, h, w), binary
};

/// Sorted by stem. Throws InvalidArgument on a missing mask or a size mismatch.
std::vector<LabeledImage> load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::vector<LabeledImage>& data, const std::filesystem::path& dir);

/// Axis-aligned rectangles with corners on an 8-pixel grid, drawn in a
/// saturated colour over a noisy background of a different hue.
std::vector<LabeledImage> make_toy_images(int count, std::int64_t size, std::uint64_t seed);

std::vector<TrainSample> to_train_samples(const std::vector<LabeledImage>& data);

}  // namespace dcnet
