// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/reparam.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <sstream>

#include "dcnet/errors.hpp"
#include "dcnet/merged_conv.hpp"

namespace dcnet {

namespace {

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

Tensor concat_dim0(const Tensor& a, const Tensor& b) {
  const Shape& s = a.shape();
  Tensor out(Shape{s.n * 2, s.c, s.h, s.w});
  std::memcpy(out.data(), a.data(), sizeof(float) * static_cast<std::size_t>(a.numel()));
  std::memcpy(out.data() + a.numel(), b.data(), sizeof(float) * static_cast<std::size_t>(b.numel()));
  return out;
}

}  // namespace

ModuleGraph merge_dual_encoder(const ModuleGraph& dual) {
  if (dual.encoder_merged) throw CannotMerge("graph already has a merged encoder");
  const std::string p1 = std::string(kEncoder1) + ".", p2 = std::string(kEncoder2) + ".";
  for (const Parameter* p : dual.params.all()) {
    const bool first = starts_with(p->name, p1);
    if (!first && !starts_with(p->name, p2)) continue;
    const std::string other = (first ? p2 : p1) + p->name.substr(p1.size());
    const Parameter* q = dual.params.find(other);
    if (q == nullptr) throw CannotMerge("encoders are not isomorphic: " + other + " is missing");
    if (!(q->value().shape() == p->value().shape()))
      throw CannotMerge("encoders are not isomorphic: " + p->name + " " + p->value().shape().str() + " vs " +
                        other + " " + q->value().shape().str());
  }

  ModuleGraph merged{dual.config, ParamStore{}, true};
  Rng rng(0);
  ParamBinder binder(merged.params, &rng);
  bind_encoder(binder, kMergedEncoder, dual.config, 2);
  const std::string pm = std::string(kMergedEncoder) + ".";
  for (Parameter* p : merged.params.all()) {
    const std::string tail = p->name.substr(pm.size());
    const Parameter* a = dual.params.find(p1 + tail);
    const Parameter* b = dual.params.find(p2 + tail);
    if (a == nullptr || b == nullptr) throw CannotMerge("encoder has no parameter " + p1 + tail);
    Tensor v = concat_dim0(a->value(), b->value());
    if (!(v.shape() == p->value().shape()))
      throw CannotMerge("cannot map " + p1 + tail + " " + a->value().shape().str() + " onto " + p->name + " " +
                        p->value().shape().str());
    p->value() = std::move(v);
    p->momentum = Tensor(p->value().shape());
    p->trainable = a->trainable;
  }
  for (const Parameter* p : dual.params.all())
    if (!starts_with(p->name, p1) && !starts_with(p->name, p2))
      merged.params.add(p->name, p->value(), p->trainable);
  DCNet check(merged);  // binds every decoder tensor; throws on anything missing
  return merged;
}

double EquivalenceReport::max_abs() const {
  double m = side_max_abs;
  for (double s : stage_max_abs) m = std::max(m, s);
  return m;
}

double side_map_max_abs(const ForwardOutputs& a, const ForwardOutputs& b) {
  auto cmp = [](const std::vector<Tensor>& x, const std::vector<Tensor>& y) {
    if (x.size() != y.size()) throw InvalidArgument("side map counts differ");
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, static_cast<double>(max_abs_diff(x[i], y[i])));
    return m;
  };
  return std::max({cmp(a.enc1, b.enc1), cmp(a.enc2, b.enc2), cmp(a.dec, b.dec)});
}

EquivalenceReport compare_forwards(ModuleGraph& dual, ModuleGraph& merged, const Tensor& images,
                                   bool merged_convs) {
  DCNet a(dual), b(merged);
  ForwardOutputs ra = a.infer(images, false);
  ForwardOutputs rb = b.infer(images, merged_convs);
  EquivalenceReport rep;
  for (std::size_t e = 0; e < ra.features.size(); ++e)
    rep.stage_max_abs.push_back(max_abs_diff(ra.features[e], rb.features[e]));
  rep.side_max_abs = side_map_max_abs(ra, rb);
  return rep;
}

std::vector<BenchRow> bench(ModuleGraph& dual, ModuleGraph& merged, const Tensor& images, const BenchOptions& opts) {
  if (opts.repeats < 3) throw InvalidArgument("bench needs at least 3 repeats");
  if (dual.encoder_merged || !merged.encoder_merged)
    throw InvalidArgument("bench expects a dual graph and a merged graph");
  DCNet nets[2] = {DCNet(dual), DCNet(merged)};
  nets[1].refresh_plans();
  nets[0].refresh_plans();

  std::vector<BenchRow> rows;
  const ForwardOutputs reference = nets[0].infer(images, false);
  for (int enc = 0; enc < 2; ++enc)
    for (int conv = 0; conv < 2; ++conv) {
      BenchRow row;
      row.encoder_merged = enc == 1;
      row.convs_merged = conv == 1;
      row.variant = std::string(enc ? "merged-encoder" : "dual-encoder") + (conv ? "+merged-convs" : "");
      GemmCounterScope scope;
      ForwardOutputs out = nets[enc].infer(images, conv == 1);
      const GemmCounter c = scope.read();
      row.gemm_calls = c.gemm_calls;
      row.unfold_calls = c.unfold_calls;
      row.max_abs_diff = side_map_max_abs(reference, out);
      if (!(row.max_abs_diff <= opts.tol)) {
        std::ostringstream msg;
        msg << row.variant << " differs from the unmerged forward by " << row.max_abs_diff << " (tolerance "
            << opts.tol << ")";
        throw EquivalenceFailure(msg.str());
      }
      rows.push_back(row);
    }

  for (BenchRow& row : rows) {
    DCNet& net = nets[row.encoder_merged ? 1 : 0];
    net.infer(images, row.convs_merged);  // warm-up
    std::vector<double> ms;
    for (int r = 0; r < opts.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      net.infer(images, row.convs_merged);
      ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    row.median_ms = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %10s %8s %8s %12s\n", "variant", "median-ms", "gemms", "unfolds",
                "max-abs-diff");
  os << line;
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof line, "%-28s %10.3f %8llu %8llu %12.3e\n", r.variant.c_str(), r.median_ms,
                  static_cast<unsigned long long>(r.gemm_calls), static_cast<unsigned long long>(r.unfold_calls),
                  r.max_abs_diff);
    os << line;
  }
  return os.str();
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "variant,median-ms,gemm-count,unfold-count,max-abs-diff\n";
  os.precision(9);
  for (const BenchRow& r : rows)
    os << r.variant << ',' << r.median_ms << ',' << r.gemm_calls << ',' << r.unfold_calls << ',' << r.max_abs_diff
       << '\n';
  return os.str();
}

}  // namespace dcnet
