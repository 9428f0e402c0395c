// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcnet/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "dcnet/auxmaps.hpp"
#include "dcnet/dataset.hpp"
#include "dcnet/erf.hpp"
#include "dcnet/errors.hpp"
#include "dcnet/io.hpp"
#include "dcnet/metrics.hpp"
#include "dcnet/reparam.hpp"

namespace dcnet::cli {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw InvalidArgument(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

// "1..5" or "1,2,4".
std::vector<std::int64_t> parse_widths(const std::string& spec) {
  std::vector<std::int64_t> out;
  const auto dots = spec.find("..");
  try {
    if (dots != std::string::npos) {
      const std::int64_t a = std::stoll(spec.substr(0, dots)), b = std::stoll(spec.substr(dots + 2));
      for (std::int64_t w = a; w <= b; ++w) out.push_back(w);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
    }
  } catch (const std::logic_error&) {
    throw InvalidArgument("cannot parse widths '" + spec + "'");
  }
  if (out.empty()) throw InvalidArgument("no widths in '" + spec + "'");
  for (std::int64_t w : out)
    if (w < 1) throw InvalidArgument("edge widths must be >= 1");
  return out;
}

Tensor random_images(const DCNetConfig& cfg, std::int64_t batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor t(Shape{batch, cfg.in_channels, cfg.height, cfg.width});
  for (float& v : t.span()) v = u(rng);
  return t;
}

// ---- subcommands -------------------------------------------------------------

struct AuxArgs {
  std::string gt, out, widths = "1..5";
};

int cmd_aux(const AuxArgs& a, std::ostream& out) {
  const std::vector<std::int64_t> widths = parse_widths(a.widths);
  const std::vector<fs::path> masks = files_with_extension(a.gt, ".pgm");
  if (masks.empty()) throw InvalidArgument("no .pgm masks in " + a.gt);
  fs::create_directories(a.out);
  for (const fs::path& p : masks) {
    const Tensor mask = binarize(io::read_pgm(p));
    const std::string stem = p.stem().string();
    for (std::int64_t w : widths)
      io::write_pgm(edge_map(mask, w), fs::path(a.out) / (stem + "_edge" + std::to_string(w) + ".pgm"));
    io::write_pgm(location_map(mask), fs::path(a.out) / (stem + "_loc.pgm"));
    const BodyDetail bd = body_detail(mask);
    io::write_pgm(bd.body, fs::path(a.out) / (stem + "_body.pgm"));
    io::write_pgm(bd.detail, fs::path(a.out) / (stem + "_detail.pgm"));
  }
  out << "wrote auxiliary maps for " << masks.size() << " masks to " << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data, out;
  std::int64_t iters = 200;
  float lr = 0.01f, momentum = 0.9f, weight_decay = 1e-4f;
  std::uint64_t seed = 1;
  std::int64_t batch = 0;
  std::vector<std::int64_t> widths{16, 32, 64, 128};
  std::int64_t mid_divisor = 2;
  std::int64_t log_every = 10;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const std::vector<LabeledImage> data = load_dataset(a.data);
  if (data.empty()) throw InvalidArgument("no training images in " + a.data);
  DCNetConfig cfg;
  cfg.encoder_stages = static_cast<std::int64_t>(a.widths.size());
  cfg.decoder_stages = cfg.encoder_stages + 1;
  cfg.widths = a.widths;
  cfg.mid_divisor = a.mid_divisor;
  cfg.height = data.front().image.shape().h;
  cfg.width = data.front().image.shape().w;
  ModuleGraph graph = build_graph(cfg, a.seed);
  DCNet net(graph);
  const std::vector<TrainSample> samples = to_train_samples(data);
  TrainConfig tc;
  tc.opt = OptimizerConfig{a.lr, a.momentum, a.weight_decay};
  tc.batch_size = a.batch;
  const std::vector<double> history =
      train_loop(net, samples, a.iters, tc, [&](std::int64_t it, const LossReport& rep) {
        if (a.log_every > 0 && (it % a.log_every == 0 || it + 1 == a.iters))
          out << "iter " << it << " loss " << rep.total << "\n";
        return true;
      });
  io::save_checkpoint(graph, a.out);
  out << "saved " << a.out << " after " << history.size() << " iterations";
  if (!history.empty()) out << ", loss " << history.front() << " -> " << history.back();
  out << "\n";
  return kExitOk;
}

struct InferArgs {
  std::string ckpt, in, out;
  bool merged = false;
};

int cmd_infer(const InferArgs& a, std::ostream& out) {
  ModuleGraph graph = io::load_checkpoint(a.ckpt);
  if (a.merged && !graph.encoder_merged) graph = merge_dual_encoder(graph);
  DCNet net(graph);
  const std::vector<fs::path> images = files_with_extension(a.in, ".ppm");
  if (images.empty()) throw InvalidArgument("no .ppm images in " + a.in);
  fs::create_directories(a.out);
  for (const fs::path& p : images) {
    const ForwardOutputs o = net.infer(io::read_ppm(p), a.merged);
    io::write_pgm(o.sup1(), fs::path(a.out) / (p.stem().string() + ".pgm"));
  }
  out << "wrote " << images.size() << " saliency maps to " << a.out << "\n";
  return kExitOk;
}

struct MergeArgs {
  std::string ckpt, out;
};

int cmd_merge(const MergeArgs& a, std::ostream& out) {
  const ModuleGraph merged = merge_dual_encoder(io::load_checkpoint(a.ckpt));
  io::save_checkpoint(merged, a.out);
  out << "merged encoder written to " << a.out << "\n";
  return kExitOk;
}

struct VerifyArgs {
  std::string ckpt;
  double tol = 1e-4;
  std::uint64_t seed = 1;
  std::int64_t batch = 2;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  ModuleGraph dual = io::load_checkpoint(a.ckpt);
  ModuleGraph merged = merge_dual_encoder(dual);
  const Tensor images = random_images(dual.config, a.batch, a.seed);
  const EquivalenceReport rep = compare_forwards(dual, merged, images, true);
  for (std::size_t e = 0; e < rep.stage_max_abs.size(); ++e)
    out << "stage " << e + 1 << " max-abs " << rep.stage_max_abs[e] << "\n";
  out << "side maps max-abs " << rep.side_max_abs << "\n";
  const bool ok = rep.max_abs() <= a.tol;
  out << (ok ? "equivalent" : "NOT equivalent") << " (max-abs " << rep.max_abs() << ", tolerance " << a.tol << ")\n";
  return ok ? kExitOk : kExitFailure;
}

struct BenchArgs {
  std::string ckpt, csv;
  int repeats = 5;
  std::int64_t batch = 1;
  std::uint64_t seed = 1;
  double tol = 1e-4;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  ModuleGraph dual = io::load_checkpoint(a.ckpt);
  ModuleGraph merged = merge_dual_encoder(dual);
  const Tensor images = random_images(dual.config, a.batch, a.seed);
  const std::vector<BenchRow> rows = bench(dual, merged, images, BenchOptions{a.repeats, a.tol});
  out << bench_table(rows);
  if (!a.csv.empty()) io::write_text_atomic(a.csv, bench_csv(rows));
  return kExitOk;
}

struct EvalArgs {
  std::string pred, gt, out, curves;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const std::vector<fs::path> gts = files_with_extension(a.gt, ".pgm");
  if (gts.empty()) throw InvalidArgument("no .pgm ground truth in " + a.gt);
  DatasetEvaluator ev;
  for (const fs::path& g : gts) {
    const fs::path p = fs::path(a.pred) / g.filename();
    if (!fs::exists(p)) throw InvalidArgument("no prediction for " + g.filename().string());
    ev.add(io::read_pgm(p), binarize(io::read_pgm(g)));
  }
  const MetricReport r = ev.report();
  const CurveData c = ev.curve();
  nlohmann::ordered_json j;
  j["images"] = ev.count();
  j["mae"] = r.mae;
  j["maxF"] = r.max_f;
  j["weightedF"] = r.weighted_f;
  j["sMeasure"] = r.s_measure;
  j["eMeasureMean"] = r.e_measure_mean;
  io::write_text_atomic(a.out, j.dump(2) + "\n");

  std::string curves = a.curves;
  if (curves.empty()) curves = (fs::path(a.out).parent_path() / (fs::path(a.out).stem().string() + "_curves.csv")).string();
  std::ostringstream csv;
  csv.precision(9);
  csv << "threshold,precision,recall,f\n";
  for (int t = 0; t < kThresholds; ++t) csv << t << ',' << c.precision[t] << ',' << c.recall[t] << ',' << c.f[t] << '\n';
  io::write_text_atomic(curves, csv.str());

  char line[256];
  std::snprintf(line, sizeof line, "images %zu  mae %.6f  maxF %.6f  wF %.6f  S %.6f  Em %.6f\n", ev.count(), r.mae,
                r.max_f, r.weighted_f, r.s_measure, r.e_measure_mean);
  out << line;
  return kExitOk;
}

struct ErfArgs {
  std::vector<std::string> blocks;
  double tau = 0.01;
  int seeds = 10;
  std::int64_t size = 64, c_in = 16, m = 8, c_out = 16;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_erf(const ErfArgs& a, std::ostream& out) {
  if (!(a.tau > 0.0 && a.tau < 1.0)) throw InvalidArgument("--tau must lie in (0, 1)");
  std::vector<ErfBlock> blocks;
  for (const std::string& b : a.blocks.empty() ? std::vector<std::string>{"resaspp2", "aspp"} : a.blocks)
    blocks.push_back(parse_erf_block(b));
  ErfConfig cfg;
  cfg.block = ResASPP2Config{a.c_in, a.m, a.c_out, {1, 3, 5, 7}};
  cfg.size = a.size;
  cfg.seeds = a.seeds;
  cfg.seed = a.seed;
  std::vector<ErfRow> rows;
  if (blocks.size() == 1) {
    ErfRow row{erf_block_name(blocks[0]), 0, {}, erf_map(blocks[0], cfg)};
    row.area = erf_area(row.map, a.tau);
    row.box = support_box(row.map, a.tau);
    rows.push_back(std::move(row));
  } else {
    rows = compare_modules(blocks, cfg, a.tau);
  }
  std::ostringstream csv;
  csv << "block,area,support_h,support_w\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %10s\n", "block", "area", "support");
  out << line;
  for (const ErfRow& r : rows) {
    std::snprintf(line, sizeof line, "%-10s %8lld %5lldx%-5lld\n", r.name.c_str(), static_cast<long long>(r.area),
                  static_cast<long long>(r.box.height()), static_cast<long long>(r.box.width()));
    out << line;
    csv << r.name << ',' << r.area << ',' << r.box.height() << ',' << r.box.width() << '\n';
  }
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    for (const ErfRow& r : rows) io::write_pgm(r.map, fs::path(a.out) / ("erf_" + r.name + ".pgm"));
    io::write_text_atomic(fs::path(a.out) / "erf_ranking.csv", csv.str());
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dcnet: dual-encoder saliency network toolkit", "dcnet"};
  app.require_subcommand(1);

  AuxArgs aux;
  auto* s_aux = app.add_subcommand("aux", "Generate edge, location, body and detail maps from GT masks");
  s_aux->add_option("--gt", aux.gt, "Directory of binary PGM masks")->required();
  s_aux->add_option("--out", aux.out, "Output directory")->required();
  s_aux->add_option("--widths", aux.widths, "Edge widths, e.g. 1..5 or 1,2,4")->capture_default_str();

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train a network on <data>/images/*.ppm and <data>/masks/*.pgm");
  s_train->add_option("--data", tr.data, "Dataset directory")->required();
  s_train->add_option("--out", tr.out, "Checkpoint to write")->required();
  s_train->add_option("--iters", tr.iters, "Iterations")->capture_default_str()->check(CLI::NonNegativeNumber);
  s_train->add_option("--lr", tr.lr, "Learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  s_train->add_option("--momentum", tr.momentum, "SGD momentum")->capture_default_str();
  s_train->add_option("--weight-decay", tr.weight_decay, "L2 weight decay")->capture_default_str();
  s_train->add_option("--seed", tr.seed, "Initialization seed")->capture_default_str();
  s_train->add_option("--batch", tr.batch, "Batch size (0: whole dataset)")->capture_default_str();
  s_train->add_option("--widths", tr.widths, "Encoder stage widths")->capture_default_str()->delimiter(',');
  s_train->add_option("--mid-divisor", tr.mid_divisor, "ResASPP2 m = c_out / divisor")->capture_default_str();
  s_train->add_option("--log-every", tr.log_every, "Loss log interval")->capture_default_str();

  InferArgs inf;
  auto* s_infer = app.add_subcommand("infer", "Write Sup1 saliency maps for a directory of PPM images");
  s_infer->add_option("--ckpt", inf.ckpt, "Checkpoint")->required();
  s_infer->add_option("--in", inf.in, "Directory of PPM images")->required();
  s_infer->add_option("--out", inf.out, "Output directory")->required();
  s_infer->add_flag("--merged", inf.merged, "Merge the encoders and the ResASPP2 branches before inference");

  MergeArgs mg;
  auto* s_merge = app.add_subcommand("merge", "Merge the two encoders of a checkpoint into one");
  s_merge->add_option("--ckpt", mg.ckpt, "Dual-encoder checkpoint")->required();
  s_merge->add_option("--out", mg.out, "Merged checkpoint to write")->required();

  VerifyArgs vf;
  auto* s_verify = app.add_subcommand("verify", "Check merged against unmerged inference");
  s_verify->add_option("--ckpt", vf.ckpt, "Dual-encoder checkpoint")->required();
  s_verify->add_option("--tol", vf.tol, "Max-abs tolerance")->capture_default_str();
  s_verify->add_option("--seed", vf.seed, "Input seed")->capture_default_str();
  s_verify->add_option("--batch", vf.batch, "Input batch size")->capture_default_str()->check(CLI::PositiveNumber);

  BenchArgs bn;
  auto* s_bench = app.add_subcommand("bench", "Time the four merge variants");
  s_bench->add_option("--ckpt", bn.ckpt, "Dual-encoder checkpoint")->required();
  s_bench->add_option("--repeats", bn.repeats, "Timed repeats per variant (>= 3)")->capture_default_str();
  s_bench->add_option("--batch", bn.batch, "Input batch size")->capture_default_str()->check(CLI::PositiveNumber);
  s_bench->add_option("--seed", bn.seed, "Input seed")->capture_default_str();
  s_bench->add_option("--tol", bn.tol, "Equivalence tolerance")->capture_default_str();
  s_bench->add_option("--csv", bn.csv, "Also write the table as CSV");

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "Evaluate name-matched PGM predictions against GT masks");
  s_eval->add_option("--pred", ev.pred, "Prediction directory")->required();
  s_eval->add_option("--gt", ev.gt, "Ground-truth directory")->required();
  s_eval->add_option("--out", ev.out, "JSON report to write")->required();
  s_eval->add_option("--curves", ev.curves, "CSV of the mean PR/F curves (default: <out>_curves.csv)");

  ErfArgs ef;
  auto* s_erf = app.add_subcommand("erf", "Effective receptive field of a block");
  s_erf->add_option("--block", ef.blocks, "resaspp2, aspp, conv3x3 or conv1x1 (repeatable)")->take_all();
  s_erf->add_option("--tau", ef.tau, "Support threshold relative to the maximum")->capture_default_str();
  s_erf->add_option("--seeds", ef.seeds, "Random initializations to average")->capture_default_str();
  s_erf->add_option("--size", ef.size, "Input extent")->capture_default_str();
  s_erf->add_option("--c-in", ef.c_in, "Input channels")->capture_default_str();
  s_erf->add_option("--m", ef.m, "Interior channels")->capture_default_str();
  s_erf->add_option("--c-out", ef.c_out, "Output channels")->capture_default_str();
  s_erf->add_option("--seed", ef.seed, "First seed")->capture_default_str();
  s_erf->add_option("--out", ef.out, "Directory for PGM maps and the ranking CSV");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*s_aux) return cmd_aux(aux, out);
    if (*s_train) return cmd_train(tr, out);
    if (*s_infer) return cmd_infer(inf, out);
    if (*s_merge) return cmd_merge(mg, out);
    if (*s_verify) return cmd_verify(vf, out);
    if (*s_bench) return cmd_bench(bn, out);
    if (*s_eval) return cmd_eval(ev, out);
    if (*s_erf) return cmd_erf(ef, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace dcnet::cli
