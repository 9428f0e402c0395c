// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// Writes the synthetic rectangle dataset in the layout `dcnet train` reads.

#include <CLI11.hpp>

#include <iostream>

#include "dcnet/dataset.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic saliency dataset", "make_toy_data"};
  std::string out;
  int count = 8;
  std::int64_t size = 64;
  std::uint64_t seed = 1;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--count", count, "Number of images")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--size", size, "Square image extent (multiple of 8)")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    dcnet::save_dataset(dcnet::make_toy_images(count, size, seed), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << count << " images to " << out << "\n";
  return 0;
}
