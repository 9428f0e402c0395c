// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "dcnet/auxmaps.hpp"
#include "dcnet/errors.hpp"
#include "dcnet/io.hpp"

namespace dcnet {

namespace fs = std::filesystem;

TrainSample make_train_sample(const Tensor& image, const Tensor& mask) {
  Tensor m = binarize(mask);
  if (image.shape().n != 1 || image.shape().h != m.shape().h || image.shape().w != m.shape().w)
    throw InvalidArgument("image " + image.shape().str() + " does not match mask " + m.shape().str());
  TrainSample s;
  s.image = image;
  s.aux1 = edge_map(m, kTrainEdgeWidth);
  s.aux2 = location_map(m);
  s.saliency = std::move(m);
  return s;
}

std::vector<LabeledImage> load_dataset(const fs::path& dir) {
  const fs::path images = dir / "images", masks = dir / "masks";
  if (!fs::is_directory(images) || !fs::is_directory(masks))
    throw InvalidArgument(dir.string() + " needs images/ and masks/ subdirectories");
  std::vector<LabeledImage> out;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (entry.path().extension() != ".ppm") continue;
    LabeledImage li;
    li.stem = entry.path().stem().string();
    const fs::path mask = masks / (li.stem + ".pgm");
    if (!fs::exists(mask)) throw InvalidArgument("no mask for " + entry.path().string());
    li.image = io::read_ppm(entry.path());
    li.mask = binarize(io::read_pgm(mask));
    if (li.image.shape().h != li.mask.shape().h || li.image.shape().w != li.mask.shape().w)
      throw InvalidArgument("size mismatch between " + entry.path().string() + " and " + mask.string());
    out.push_back(std::move(li));
  }
  std::sort(out.begin(), out.end(), [](const LabeledImage& a, const LabeledImage& b) { return a.stem < b.stem; });
  return out;
}

void save_dataset(const std::vector<LabeledImage>& data, const fs::path& dir) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  for (const LabeledImage& li : data) {
    io::write_ppm(li.image, dir / "images" / (li.stem + ".ppm"));
    io::write_pgm(li.mask, dir / "masks" / (li.stem + ".pgm"));
  }
}

std::vector<LabeledImage> make_toy_images(int count, std::int64_t size, std::uint64_t seed) {
  constexpr std::int64_t kCell = 8;
  if (count < 1) throw InvalidArgument("toy dataset needs at least one image");
  if (size < 4 * kCell || size % kCell != 0) throw InvalidArgument("toy image size must be a multiple of 8, >= 32");
  std::mt19937_64 rng(seed);
  const std::int64_t cells = size / kCell;
  std::uniform_int_distribution<std::int64_t> extent(2, cells - 2);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  std::vector<LabeledImage> out;
  for (int i = 0; i < count; ++i) {
    const std::int64_t h = extent(rng), w = extent(rng);
    const std::int64_t y0 = std::uniform_int_distribution<std::int64_t>(0, cells - h)(rng);
    const std::int64_t x0 = std::uniform_int_distribution<std::int64_t>(0, cells - w)(rng);
    const float fg[3] = {0.85f, 0.25f + 0.1f * static_cast<float>(i % 3), 0.2f};
    const float bg[3] = {0.25f, 0.45f, 0.65f + 0.05f * static_cast<float>(i % 4)};
    LabeledImage li;
    char stem[32];
    std::snprintf(stem, sizeof stem, "toy%03d", i);
    li.stem = stem;
    li.image = Tensor(Shape{1, 3, size, size});
    li.mask = Tensor(Shape{1, 1, size, size});
    for (std::int64_t y = 0; y < size; ++y)
      for (std::int64_t x = 0; x < size; ++x) {
        const bool inside = y >= y0 * kCell && y < (y0 + h) * kCell && x >= x0 * kCell && x < (x0 + w) * kCell;
        li.mask.at(0, 0, y, x) = inside ? 1.0f : 0.0f;
        for (std::int64_t c = 0; c < 3; ++c)
          li.image.at(0, c, y, x) = std::clamp((inside ? fg : bg)[c] + noise(rng), 0.0f, 1.0f);
      }
    out.push_back(std::move(li));
  }
  return out;
}

std::vector<TrainSample> to_train_samples(const std::vector<LabeledImage>& data) {
  std::vector<TrainSample> out;
  out.reserve(data.size());
  for (const LabeledImage& li : data) out.push_back(make_train_sample(li.image, li.mask));
  return out;
}

}  // namespace dcnet
