// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

// File formats.
//
// Tensor container (little-endian):
//   "DCTN" | u8 version = 1 | u8 dtype = 0 (fp32) | u32 rank | rank × u32 dims | fp32 payload
// Tensors are written with rank 4 (n, c, h, w); readers accept rank 0..4 and
// pad missing trailing dimensions with 1.
//
// Checkpoint: a sequence of records (u32 name length, UTF-8 name, container)
// up to end of file. The first record, "meta.config", stores the network
// configuration as a vector: E, D, mid_divisor, in_channels, height, width,
// encoder_merged, widths[0..E).
//
// Images: binary PGM (P5) and PPM (P6) with maxval 255; values map to v/255
// and are written back as floor(255·x + 0.5).
//
// Every writer goes through a temporary file and a rename, so a failed write
// leaves no partial output.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dcnet/dcnet.hpp"
#include "dcnet/tensor.hpp"

namespace dcnet::io {

namespace fs = std::filesystem;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
/// Decodes one container starting at `offset`, advancing it. FormatError
/// offsets are absolute positions in `bytes`.
Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::size_t& offset);

void save_tensor(const Tensor& t, const fs::path& path);
Tensor load_tensor(const fs::path& path);

/// (1, 1, h, w) in [0, 1].
Tensor read_pgm(const fs::path& path);
void write_pgm(const Tensor& t, const fs::path& path);
/// (1, 3, h, w) in [0, 1].
Tensor read_ppm(const fs::path& path);
void write_ppm(const Tensor& t, const fs::path& path);

std::vector<std::uint8_t> read_file(const fs::path& path);
/// Writes through "<path>.tmp" and renames.
void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const fs::path& path, const std::string& text);

inline constexpr const char* kMetaRecord = "meta.config";

std::vector<std::uint8_t> encode_checkpoint(const ModuleGraph& graph);
ModuleGraph decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const ModuleGraph& graph, const fs::path& path);
/// Validates the parameter tree against the layout its configuration implies;
/// a mismatch throws InvalidArgument naming the first offending tensor.
ModuleGraph load_checkpoint(const fs::path& path);
/// Replaces the parameters of `graph` with those from `path`. The checkpoint
/// must have exactly the same names and shapes; on failure `graph` is unchanged.
void load_checkpoint_into(ModuleGraph& graph, const fs::path& path);

/// Names and shapes of the reference layout for `cfg` (dual or merged form).
std::vector<std::pair<std::string, Shape>> expected_layout(const DCNetConfig& cfg, bool encoder_merged);

}  // namespace dcnet::io
