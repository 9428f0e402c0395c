// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "dcnet/errors.hpp"

namespace dcnet::io {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'D', 'C', 'T', 'N'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t& off, const char* what) {
  if (b.size() - off < 4 || off > b.size()) throw FormatError(std::string("truncated ") + what, off);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
  off += 4;
  return v;
}

std::uint8_t to_byte(float x) {
  const double q = std::floor(static_cast<double>(x) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(q < 0.0 ? 0.0 : (q > 255.0 ? 255.0 : q));
}

// ---- netpbm ----------------------------------------------------------------

struct Netpbm {
  std::int64_t w = 0, h = 0, channels = 0;
  std::size_t data = 0;
};

void skip_space(const std::vector<std::uint8_t>& b, std::size_t& off) {
  for (;;) {
    while (off < b.size() && std::isspace(b[off])) ++off;
    if (off < b.size() && b[off] == '#') {
      while (off < b.size() && b[off] != '\n') ++off;
      continue;
    }
    return;
  }
}

std::int64_t read_header_int(const std::vector<std::uint8_t>& b, std::size_t& off, const char* what) {
  skip_space(b, off);
  const std::size_t start = off;
  std::int64_t v = 0;
  while (off < b.size() && b[off] >= '0' && b[off] <= '9') {
    v = v * 10 + (b[off] - '0');
    if (v > (1 << 24)) throw FormatError(std::string(what) + " too large", start);
    ++off;
  }
  if (off == start) throw FormatError(std::string("expected ") + what, start);
  return v;
}

Netpbm parse_netpbm(const std::vector<std::uint8_t>& b, char kind) {
  if (b.size() < 2 || b[0] != 'P' || b[1] != static_cast<std::uint8_t>(kind))
    throw FormatError(std::string("bad magic, expected P") + kind, 0);
  std::size_t off = 2;
  Netpbm img;
  img.channels = kind == '5' ? 1 : 3;
  img.w = read_header_int(b, off, "width");
  img.h = read_header_int(b, off, "height");
  const std::size_t maxval_at = off;
  const std::int64_t maxval = read_header_int(b, off, "maxval");
  if (maxval != 255) throw FormatError("maxval must be 255, got " + std::to_string(maxval), maxval_at);
  if (img.w < 1 || img.h < 1) throw FormatError("empty image", maxval_at);
  if (off >= b.size() || !std::isspace(b[off])) throw FormatError("missing separator before pixel data", off);
  img.data = off + 1;
  const std::size_t need = static_cast<std::size_t>(img.w * img.h * img.channels);
  if (b.size() - img.data < need)
    throw FormatError("truncated pixel data: " + std::to_string(b.size() - img.data) + " of " + std::to_string(need) +
                          " bytes",
                      b.size());
  return img;
}

std::vector<std::uint8_t> netpbm_bytes(const Tensor& t, char kind) {
  const Shape& s = t.shape();
  const std::int64_t channels = kind == '5' ? 1 : 3;
  if (s.n != 1 || s.c != channels)
    throw InvalidArgument(std::string(kind == '5' ? "PGM" : "PPM") + " needs shape (1, " + std::to_string(channels) +
                          ", h, w), got " + s.str());
  const std::string header = std::string("P") + kind + "\n" + std::to_string(s.w) + " " + std::to_string(s.h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::int64_t y = 0; y < s.h; ++y)
    for (std::int64_t x = 0; x < s.w; ++x)
      for (std::int64_t c = 0; c < channels; ++c) out.push_back(to_byte(t.at(0, c, y, x)));
  return out;
}

}  // namespace

// ---- containers --------------------------------------------------------------

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(kDtypeF32);
  put_u32(out, 4);
  const Shape& s = t.shape();
  for (std::int64_t d : {s.n, s.c, s.h, s.w}) put_u32(out, static_cast<std::uint32_t>(d));
  const std::size_t at = out.size();
  out.resize(at + sizeof(float) * static_cast<std::size_t>(t.numel()));
  if (t.numel() > 0) std::memcpy(out.data() + at, t.data(), sizeof(float) * static_cast<std::size_t>(t.numel()));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> b, std::size_t& off) {
  const std::size_t start = off;
  if (off > b.size() || b.size() - off < 6) throw FormatError("truncated tensor header", off);
  if (std::memcmp(b.data() + off, kMagic, 4) != 0) throw FormatError("bad tensor magic", off);
  if (b[off + 4] != kVersion) throw FormatError("unsupported version " + std::to_string(b[off + 4]), off + 4);
  if (b[off + 5] != kDtypeF32) throw FormatError("unsupported dtype " + std::to_string(b[off + 5]), off + 5);
  off += 6;
  const std::size_t rank_at = off;
  const std::uint32_t rank = get_u32(b, off, "rank");
  if (rank > 4) throw FormatError("rank " + std::to_string(rank) + " exceeds 4", rank_at);
  std::int64_t dims[4] = {1, 1, 1, 1};
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    dims[i] = get_u32(b, off, "dims");
    count *= static_cast<std::uint64_t>(dims[i]);
    if (count > (std::uint64_t{1} << 34)) throw FormatError("tensor too large", off - 4);
  }
  const std::uint64_t bytes = count * sizeof(float);
  if (b.size() - off < bytes)
    throw FormatError("truncated payload: tensor at byte " + std::to_string(start) + " needs " + std::to_string(bytes) +
                          " bytes",
                      b.size());
  Tensor t(Shape{dims[0], dims[1], dims[2], dims[3]});
  if (count > 0) std::memcpy(t.data(), b.data() + off, static_cast<std::size_t>(bytes));
  off += static_cast<std::size_t>(bytes);
  return t;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw InvalidArgument("write failed: " + path.string());
    }
  }
  fs::rename(tmp, path);
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_tensor(const Tensor& t, const fs::path& path) { write_file_atomic(path, encode_tensor(t)); }

Tensor load_tensor(const fs::path& path) {
  const std::vector<std::uint8_t> b = read_file(path);
  std::size_t off = 0;
  Tensor t = decode_tensor(b, off);
  if (off != b.size()) throw FormatError("trailing bytes after tensor", off);
  return t;
}

// ---- images ------------------------------------------------------------------

Tensor read_pgm(const fs::path& path) {
  const std::vector<std::uint8_t> b = read_file(path);
  const Netpbm img = parse_netpbm(b, '5');
  Tensor t(Shape{1, 1, img.h, img.w});
  for (std::int64_t i = 0; i < img.w * img.h; ++i) t[i] = static_cast<float>(b[img.data + static_cast<std::size_t>(i)]) / 255.0f;
  return t;
}

void write_pgm(const Tensor& t, const fs::path& path) { write_file_atomic(path, netpbm_bytes(t, '5')); }

Tensor read_ppm(const fs::path& path) {
  const std::vector<std::uint8_t> b = read_file(path);
  const Netpbm img = parse_netpbm(b, '6');
  Tensor t(Shape{1, 3, img.h, img.w});
  std::size_t p = img.data;
  for (std::int64_t y = 0; y < img.h; ++y)
    for (std::int64_t x = 0; x < img.w; ++x)
      for (std::int64_t c = 0; c < 3; ++c) t.at(0, c, y, x) = static_cast<float>(b[p++]) / 255.0f;
  return t;
}

void write_ppm(const Tensor& t, const fs::path& path) { write_file_atomic(path, netpbm_bytes(t, '6')); }

// ---- checkpoints ---------------------------------------------------------------

namespace {

Tensor encode_config(const ModuleGraph& g) {
  const DCNetConfig& c = g.config;
  std::vector<float> v = {static_cast<float>(c.encoder_stages), static_cast<float>(c.decoder_stages),
                          static_cast<float>(c.mid_divisor),    static_cast<float>(c.in_channels),
                          static_cast<float>(c.height),         static_cast<float>(c.width),
                          g.encoder_merged ? 1.0f : 0.0f};
  for (std::int64_t w : c.widths) v.push_back(static_cast<float>(w));
  const auto n = static_cast<std::int64_t>(v.size());
  return Tensor(Shape{n, 1, 1, 1}, std::move(v));
}

std::pair<DCNetConfig, bool> decode_config(const Tensor& t, std::size_t offset) {
  auto as_int = [&](std::int64_t i) {
    const float f = t[i];
    if (!(f >= 0.0f && f < 16777216.0f) || f != std::floor(f))
      throw FormatError("meta.config entry " + std::to_string(i) + " is not a count", offset);
    return static_cast<std::int64_t>(f);
  };
  if (t.numel() < 7) throw FormatError("meta.config too short", offset);
  DCNetConfig c;
  c.encoder_stages = as_int(0);
  c.decoder_stages = as_int(1);
  c.mid_divisor = as_int(2);
  c.in_channels = as_int(3);
  c.height = as_int(4);
  c.width = as_int(5);
  const bool merged = as_int(6) != 0;
  c.widths.clear();
  for (std::int64_t i = 7; i < t.numel(); ++i) c.widths.push_back(as_int(i));
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("meta.config: ") + e.what(), offset);
  }
  return {c, merged};
}

}  // namespace

namespace {

ParamStore reference_store(const DCNetConfig& cfg, bool encoder_merged) {
  cfg.validate();
  ParamStore store;
  Rng rng(0);
  ParamBinder binder(store, &rng);
  if (encoder_merged) {
    bind_encoder(binder, kMergedEncoder, cfg, 2);
  } else {
    bind_encoder(binder, kEncoder1, cfg, 1);
    bind_encoder(binder, kEncoder2, cfg, 1);
  }
  bind_decoder(binder, cfg);
  return store;
}

}  // namespace

std::vector<std::pair<std::string, Shape>> expected_layout(const DCNetConfig& cfg, bool encoder_merged) {
  const ParamStore store = reference_store(cfg, encoder_merged);
  std::vector<std::pair<std::string, Shape>> layout;
  for (const Parameter* p : store.all()) layout.emplace_back(p->name, p->value().shape());
  return layout;
}

std::vector<std::uint8_t> encode_checkpoint(const ModuleGraph& graph) {
  std::vector<std::uint8_t> out;
  auto record = [&](const std::string& name, const Tensor& t) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    const std::vector<std::uint8_t> body = encode_tensor(t);
    out.insert(out.end(), body.begin(), body.end());
  };
  record(kMetaRecord, encode_config(graph));
  for (const Parameter* p : graph.params.all()) record(p->name, p->value());
  return out;
}

ModuleGraph decode_checkpoint(std::span<const std::uint8_t> b) {
  std::size_t off = 0;
  std::vector<std::pair<std::string, Tensor>> records;
  std::map<std::string, std::size_t> index;
  while (off < b.size()) {
    const std::size_t at = off;
    const std::uint32_t len = get_u32(b, off, "record name length");
    if (len == 0 || len > 4096 || b.size() - off < len) throw FormatError("bad record name length", at);
    std::string name(reinterpret_cast<const char*>(b.data() + off), len);
    off += len;
    Tensor t = decode_tensor(b, off);
    if (index.count(name)) throw FormatError("duplicate record " + name, at);
    index[name] = records.size();
    records.emplace_back(std::move(name), std::move(t));
  }
  if (records.empty() || records.front().first != kMetaRecord) throw FormatError("checkpoint lacks meta.config", 0);
  auto [cfg, merged] = decode_config(records.front().second, 0);

  const ParamStore reference = reference_store(cfg, merged);
  for (const Parameter* p : reference.all()) {
    auto it = index.find(p->name);
    if (it == index.end()) throw InvalidArgument("checkpoint is missing " + p->name);
    const Shape& got = records[it->second].second.shape();
    if (!(got == p->value().shape()))
      throw InvalidArgument(p->name + " has shape " + got.str() + ", expected " + p->value().shape().str());
  }
  for (std::size_t i = 1; i < records.size(); ++i)
    if (!reference.contains(records[i].first))
      throw InvalidArgument("checkpoint has unexpected tensor " + records[i].first);

  ModuleGraph graph{cfg, ParamStore{}, merged};
  for (std::size_t i = 1; i < records.size(); ++i)
    graph.params.add(records[i].first, std::move(records[i].second), reference.at(records[i].first).trainable);
  return graph;
}

void save_checkpoint(const ModuleGraph& graph, const fs::path& path) {
  write_file_atomic(path, encode_checkpoint(graph));
}

ModuleGraph load_checkpoint(const fs::path& path) { return decode_checkpoint(read_file(path)); }

void load_checkpoint_into(ModuleGraph& graph, const fs::path& path) {
  ModuleGraph loaded = load_checkpoint(path);
  if (loaded.encoder_merged != graph.encoder_merged)
    throw InvalidArgument(std::string("checkpoint holds a ") + (loaded.encoder_merged ? "merged" : "dual") +
                          "-encoder graph, target is " + (graph.encoder_merged ? "merged" : "dual"));
  for (const Parameter* p : graph.params.all()) {
    const Parameter* q = loaded.params.find(p->name);
    if (q == nullptr) throw InvalidArgument("checkpoint is missing " + p->name);
    if (!(q->value().shape() == p->value().shape()))
      throw InvalidArgument(p->name + " has shape " + q->value().shape().str() + ", expected " + p->value().shape().str());
  }
  if (loaded.params.size() != graph.params.size()) throw InvalidArgument("checkpoint has tensors the graph lacks");
  for (Parameter* p : graph.params.all()) {
    p->value() = loaded.params.at(p->name).value();
    p->momentum = Tensor(p->value().shape());
  }
  graph.config = loaded.config;
}

}  // namespace dcnet::io
