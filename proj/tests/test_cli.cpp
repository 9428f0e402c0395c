// Copyright 2026 The dcnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dcnet/auxmaps.hpp"
#include "dcnet/cli.hpp"
#include "dcnet/dataset.hpp"
#include "dcnet/io.hpp"
#include "oracles.hpp"

namespace dcnet {
namespace {

namespace fs = std::filesystem;
using testing::temp_dir;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "dcnet");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A two-stage, 8-channel network trained for a few steps on 32×32 toy data.
fs::path trained_checkpoint(const fs::path& dir, const std::string& name = "net.ckpt", const std::string& seed = "3") {
  if (!fs::exists(dir / "data")) save_dataset(make_toy_images(2, 32, 5), dir / "data");
  const Result r = run({"train", "--data", (dir / "data").string(), "--out", (dir / name).string(), "--iters", "3",
                        "--widths", "8,8", "--seed", seed, "--log-every", "0"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  return dir / name;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  const Result flag = run({"eval", "--pred", "a", "--gt", "b", "--out", "c", "--bogus"});
  EXPECT_EQ(flag.code, cli::kExitUsage);
  EXPECT_NE(flag.err.find("--pred"), std::string::npos) << "help text missing: " << flag.err;
  EXPECT_EQ(run({"verify"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "--data", "d", "--out", "o", "--iters", "-4"}).code, cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, cli::kExitOk); }

TEST(Cli, ValidationFailuresExitOne) {
  const fs::path dir = temp_dir("cli_fail");
  const Result missing = run({"eval", "--pred", (dir / "p").string(), "--gt", (dir / "none").string(), "--out",
                              (dir / "r.json").string()});
  EXPECT_EQ(missing.code, cli::kExitFailure);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(run({"verify", "--ckpt", (dir / "absent.ckpt").string()}).code, cli::kExitFailure);
  EXPECT_EQ(run({"erf", "--block", "rsu"}).code, cli::kExitFailure);
  EXPECT_FALSE(fs::exists(dir / "r.json"));
}

TEST(Cli, AuxWritesEveryMap) {
  const fs::path dir = temp_dir("cli_aux");
  const std::vector<LabeledImage> data = make_toy_images(2, 32, 1);
  fs::create_directories(dir / "gt");
  for (const LabeledImage& d : data) io::write_pgm(d.mask, dir / "gt" / (d.stem + ".pgm"));
  const Result r = run({"aux", "--gt", (dir / "gt").string(), "--out", (dir / "aux").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  for (const LabeledImage& d : data) {
    for (int w = 1; w <= 5; ++w) {
      const fs::path p = dir / "aux" / (d.stem + "_edge" + std::to_string(w) + ".pgm");
      ASSERT_TRUE(fs::exists(p)) << p;
      EXPECT_EQ(io::read_pgm(p).values(), edge_map(d.mask, w).values());
    }
    EXPECT_EQ(io::read_pgm(dir / "aux" / (d.stem + "_loc.pgm")).values(), location_map(d.mask).values());
    EXPECT_TRUE(fs::exists(dir / "aux" / (d.stem + "_body.pgm")));
    EXPECT_TRUE(fs::exists(dir / "aux" / (d.stem + "_detail.pgm")));
  }
  const Result some = run({"aux", "--gt", (dir / "gt").string(), "--out", (dir / "aux2").string(), "--widths", "2,4"});
  ASSERT_EQ(some.code, cli::kExitOk) << some.err;
  EXPECT_TRUE(fs::exists(dir / "aux2" / (data[0].stem + "_edge4.pgm")));
  EXPECT_FALSE(fs::exists(dir / "aux2" / (data[0].stem + "_edge1.pgm")));
}

TEST(Cli, EvalPerfectPrediction) {
  const fs::path dir = temp_dir("cli_eval");
  fs::create_directories(dir / "gt");
  for (const LabeledImage& d : make_toy_images(3, 32, 2)) io::write_pgm(d.mask, dir / "gt" / (d.stem + ".pgm"));
  const Result r = run({"eval", "--pred", (dir / "gt").string(), "--gt", (dir / "gt").string(), "--out",
                        (dir / "report.json").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const nlohmann::json j = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(j["images"], 3);
  EXPECT_EQ(j["mae"].get<double>(), 0.0);
  EXPECT_NEAR(j["maxF"].get<double>(), 1.0, 1e-6);
  EXPECT_NEAR(j["sMeasure"].get<double>(), 1.0, 1e-6);
  const std::string curves = slurp(dir / "report_curves.csv");
  EXPECT_EQ(curves.rfind("threshold,precision,recall,f\n", 0), 0u);
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 257);
}

TEST(Cli, TrainVerifyMergeInferBench) {
  const fs::path dir = temp_dir("cli_pipeline");
  const fs::path ckpt = trained_checkpoint(dir);

  const Result verify = run({"verify", "--ckpt", ckpt.string(), "--tol", "1e-4"});
  EXPECT_EQ(verify.code, cli::kExitOk) << verify.out << verify.err;
  EXPECT_NE(verify.out.find("equivalent"), std::string::npos);
  EXPECT_EQ(verify.out.find("NOT"), std::string::npos);

  const Result merge = run({"merge", "--ckpt", ckpt.string(), "--out", (dir / "merged.ckpt").string()});
  ASSERT_EQ(merge.code, cli::kExitOk) << merge.err;
  EXPECT_TRUE(io::load_checkpoint(dir / "merged.ckpt").encoder_merged);
  EXPECT_EQ(run({"merge", "--ckpt", (dir / "merged.ckpt").string(), "--out", (dir / "again.ckpt").string()}).code,
            cli::kExitFailure);

  const std::string images = (dir / "data" / "images").string();
  ASSERT_EQ(run({"infer", "--ckpt", ckpt.string(), "--in", images, "--out", (dir / "plain").string()}).code, 0);
  ASSERT_EQ(run({"infer", "--ckpt", ckpt.string(), "--in", images, "--out", (dir / "fast").string(), "--merged"}).code, 0);
  ASSERT_EQ(run({"infer", "--ckpt", (dir / "merged.ckpt").string(), "--in", images, "--out", (dir / "pre").string(),
                 "--merged"}).code,
            0);
  for (const auto& e : fs::directory_iterator(dir / "plain")) {
    const Tensor a = io::read_pgm(e.path()), b = io::read_pgm(dir / "fast" / e.path().filename()),
                 c = io::read_pgm(dir / "pre" / e.path().filename());
    ASSERT_EQ(a.shape(), (Shape{1, 1, 32, 32}));
    for (std::int64_t i = 0; i < a.numel(); ++i) {
      EXPECT_LE(std::abs(a[i] - b[i]), 1.0f / 255.0f + 1e-6f);
      EXPECT_EQ(b[i], c[i]);
    }
  }

  const Result bench = run({"bench", "--ckpt", ckpt.string(), "--repeats", "3", "--csv", (dir / "bench.csv").string()});
  ASSERT_EQ(bench.code, cli::kExitOk) << bench.err;
  EXPECT_NE(bench.out.find("merged-encoder+merged-convs"), std::string::npos);
  EXPECT_EQ(slurp(dir / "bench.csv").rfind("variant,", 0), 0u);
  EXPECT_EQ(run({"bench", "--ckpt", ckpt.string(), "--repeats", "2"}).code, cli::kExitFailure);
}

TEST(Cli, TrainingIsDeterministicGivenSeed) {
  const fs::path dir = temp_dir("cli_determinism");
  const fs::path a = trained_checkpoint(dir, "a.ckpt"), b = trained_checkpoint(dir, "b.ckpt");
  const fs::path c = trained_checkpoint(dir, "c.ckpt", "4");
  EXPECT_EQ(io::read_file(a), io::read_file(b));
  EXPECT_NE(io::read_file(a), io::read_file(c));
}

TEST(Cli, ErfRanksBlocks) {
  const fs::path dir = temp_dir("cli_erf");
  const Result r = run({"erf", "--block", "conv3x3", "conv1x1", "--seeds", "2", "--size", "16", "--c-in", "4", "--m",
                        "2", "--c-out", "4", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const std::string csv = slurp(dir / "erf_ranking.csv");
  EXPECT_LT(csv.find("conv3x3"), csv.find("conv1x1")) << csv;
  EXPECT_NE(csv.find(",9,"), std::string::npos) << csv;
  std::size_t maps = 0;
  for (const auto& e : fs::directory_iterator(dir)) maps += e.path().extension() == ".pgm";
  EXPECT_EQ(maps, 2u);
}

}  // namespace
}  // namespace dcnet
