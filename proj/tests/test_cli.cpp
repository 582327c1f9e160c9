// Copyright 2026 The QHBM Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "qhbm/checkpoint.hpp"
#include "qhbm/cli.hpp"
#include "qhbm/errors.hpp"

namespace qhbm {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "qhbm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("qhbm-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string p(const std::string& name) const { return (dir / name).string(); }

  // Background and signal images reduced to 2 pixels, plus a 2-qubit model.
  void prepare(int epochs = 3) {
    ASSERT_EQ(run({"--seed", "5", "synth", "--kind", "background", "--n", "40", "--grid", "12",
                   "-o", p("bkg.qimg")}).code, 0);
    ASSERT_EQ(run({"--seed", "5", "synth", "--kind", "signal", "--n", "20", "--grid", "12", "-o",
                   p("sig.qimg")}).code, 0);
    ASSERT_EQ(run({"preprocess", "-i", p("bkg.qimg"), "-o", p("bkg2.qimg"), "--qubits", "2",
                   "--crop", "2", "--pool", "2"}).code, 0);
    ASSERT_EQ(run({"preprocess", "-i", p("sig.qimg"), "-o", p("sig2.qimg"), "--qubits", "2",
                   "--crop", "2", "--pool", "2", "--standardiser-from", p("bkg2.qimg")}).code, 0);
    const auto r = train_run("out", epochs);
    ASSERT_EQ(r.code, 0) << r.err;
  }

  CliResult train_run(const std::string& out, int epochs, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"--seed",  "9",         "--output-dir",    p(out),
                                  "train",   "--train",   p("bkg2.qimg"),    "--valid",
                                  p("bkg2.qimg"), "--qubits", "2",           "--epochs",
                                  std::to_string(epochs), "--mc-samples", "40", "--embed-samples",
                                  "20",      "--batch-size", "10"};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  fs::path dir;
};

TEST_F(Cli, SynthIsDeterministic) {
  ASSERT_EQ(run({"--seed", "3", "synth", "--n", "5", "-o", p("a.csv")}).code, 0);
  ASSERT_EQ(run({"--seed", "3", "synth", "--n", "5", "-o", p("b.csv")}).code, 0);
  ASSERT_EQ(run({"--seed", "4", "synth", "--n", "5", "-o", p("c.csv")}).code, 0);
  EXPECT_EQ(slurp(p("a.csv")), slurp(p("b.csv")));
  EXPECT_NE(slurp(p("a.csv")), slurp(p("c.csv")));
  EXPECT_EQ(run({"synth", "--n", "0", "-o", p("empty.csv")}).code, 0);
  EXPECT_EQ(run({"synth", "--n", "2", "--kind", "quark", "-o", p("x.csv")}).code, kExitConfig);
}

TEST_F(Cli, ParseAndConfigErrors) {
  EXPECT_EQ(run({"synth", "--n", "2"}).code, kExitConfig);  // missing -o
  EXPECT_EQ(run({"--bogus"}).code, kExitConfig);
  std::ofstream(p("bad.json")) << R"({"train": {"n_qubits": 4, "colour": 3}})";
  const auto r = run({"--config", p("bad.json"), "--print-config"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("colour"), std::string::npos);
  std::ofstream(p("bad2.json")) << R"({"train": {"n_qubits": 4}, "extra": 1})";
  EXPECT_EQ(run({"--config", p("bad2.json"), "--print-config"}).code, kExitConfig);
  EXPECT_EQ(run({"--preset", "nine_qubit", "--print-config"}).code, kExitConfig);
}

TEST_F(Cli, PrintConfigRoundTrips) {
  const auto r = run({"--preset", "six_qubit", "--seed", "17", "--print-config"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["train"]["n_qubits"], 6);
  EXPECT_EQ(j["train"]["seed"], 17);
  std::ofstream(p("cfg.json")) << r.out;
  const auto again = run({"--config", p("cfg.json"), "--print-config"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(nlohmann::json::parse(again.out), j);
}

TEST_F(Cli, MissingInputsAreDataErrors) {
  EXPECT_EQ(run({"preprocess", "-i", p("nope.qimg"), "-o", p("x.qimg")}).code, kExitData);
  EXPECT_EQ(run({"train", "--train", p("nope.qimg"), "--valid", p("nope.qimg")}).code, kExitData);
  EXPECT_EQ(run({"evaluate", "-c", p("nope.ckpt")}).code, kExitData);
  std::ofstream(p("garbage.ckpt")) << "not a checkpoint";
  EXPECT_EQ(run({"--output-dir", p("o"), "site-entropy", "-c", p("garbage.ckpt")}).code, kExitData);
  EXPECT_FALSE(fs::exists(dir / "o" / "site_entropy.csv"));
}

TEST_F(Cli, PreprocessChecksQubitCount) {
  ASSERT_EQ(run({"synth", "--n", "6", "--grid", "12", "-o", p("raw.qimg")}).code, 0);
  ASSERT_EQ(run({"preprocess", "-i", p("raw.qimg"), "-o", p("four.qimg"), "--qubits", "4",
                 "--crop", "2", "--pool", "2"}).code, 0);
  const auto r = run({"--output-dir", p("o"), "train", "--train", p("four.qimg"), "--valid",
                      p("four.qimg"), "--qubits", "2", "--epochs", "1"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_EQ(run({"preprocess", "-i", p("raw.qimg"), "-o", p("x.qimg"), "--qubits", "5", "--crop",
                 "2", "--pool", "2"}).code,
            kExitConfig);
}

TEST_F(Cli, TrainIsReproducibleAndResumes) {
  prepare(3);
  const auto history = slurp(p("out/history.csv"));
  ASSERT_EQ(train_run("again", 3).code, 0);
  EXPECT_EQ(slurp(p("again/history.csv")), history);
  EXPECT_EQ(history.rfind("# qhbm ", 0), 0u);
  EXPECT_TRUE(fs::exists(p("out/best.ckpt")));
  EXPECT_TRUE(fs::exists(p("out/config.json")));

  const auto r = train_run("out", 5, {"--resume", p("out/last.ckpt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ck = load_checkpoint(p("out/last.ckpt"));
  ASSERT_EQ(ck.history.size(), 5u);
  for (int e = 0; e < 5; ++e) EXPECT_EQ(ck.history[std::size_t(e)].epoch, e + 1);

  ASSERT_EQ(train_run("straight", 5).code, 0);
  EXPECT_EQ(slurp(p("straight/history.csv")), slurp(p("out/history.csv")));
}

TEST_F(Cli, DownstreamCommandsWriteOutputs) {
  prepare(2);
  const std::string ck = p("out/best.ckpt");
  auto r = run({"--output-dir", p("eval"), "evaluate", "-c", ck, "--data", p("bkg2.qimg")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ev = nlohmann::json::parse(slurp(p("eval/evaluation.json")));
  EXPECT_GE(ev["metrics"]["fidelity"]["mean"].get<double>(), 0.0);
  EXPECT_LE(ev["metrics"]["fidelity"]["mean"].get<double>(), 1.0 + 1e-12);

  r = run({"--seed", "1", "generate", "-c", ck, "--n", "50", "-o", p("gen.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream gen(slurp(p("gen.csv")));
  std::string line;
  int lines = 0;
  while (std::getline(gen, line))
    if (!line.empty() && line[0] != '#') ++lines;
  EXPECT_EQ(lines, 51);  // header plus events

  r = run({"--output-dir", p("anom"), "anomaly", "-c", ck, "--signal", p("bkg2.qimg"),
           "--background", p("bkg2.qimg"), "--total-time", "5", "--draws", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto an = nlohmann::json::parse(slurp(p("anom/anomaly.json")));
  EXPECT_NEAR(an["auc_t_zero"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(an["auc_spectral"].get<double>(), 0.5, 1e-12);
  for (const char* f : {"scores.csv", "series.csv", "spectra.csv", "roc_t_zero.csv", "roc_spectral.csv"})
    EXPECT_TRUE(fs::exists(dir / "anom" / f)) << f;
  EXPECT_EQ(run({"--output-dir", p("anom"), "anomaly", "-c", ck, "--signal", p("sig2.qimg"),
                 "--background", p("bkg2.qimg"), "--f-min", "6"}).code,
            kExitConfig);

  r = run({"site-entropy", "-c", ck, "--mode", "diagonal", "-o", p("se.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(p("se.csv")).find("site_a,site_b,entropy"), std::string::npos);
}

}  // namespace
}  // namespace qhbm
