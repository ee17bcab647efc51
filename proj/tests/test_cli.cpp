// Copyright 2026 The CDDG Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cddg/config.hpp"
#include "cddg/training.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kTinyConfig = R"({
  "dataset": {"image_size": 8},
  "synthetic": {"num_classes": 3, "num_domains": 3, "n_per_cell": 5},
  "encoder": {"widths": [4, 8], "embedding_dim": 8},
  "train": {"batch_size": 8, "steps": 10, "eval_every": 5},
  "benchmark": {"seeds": [0, 1]}
})";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = cddg::testing::scratch_dir(std::string("cli_") + info->name());
    config_ = dir_ / "config.json";
    std::ofstream(config_) << kTinyConfig;
  }

  // Runs the tool with CDDG_OUTPUT_ROOT pointing at the scratch directory.
  int run(const std::string& args) {
    const std::string cmd = "CDDG_OUTPUT_ROOT='" + (dir_ / "root").string() + "' '" +
                            CDDG_CLI_PATH + "' " + args + " > '" + (dir_ / "stdout").string() +
                            "' 2> '" + (dir_ / "stderr").string() + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  int run_tiny(const std::string& sub, const std::string& args = "") {
    return run(sub + " -c '" + config_.string() + "' " + args);
  }
  std::string out() const { return slurp(dir_ / "stdout"); }
  std::string err() const { return slurp(dir_ / "stderr"); }
  fs::path root() const { return dir_ / "root"; }

  fs::path dir_;
  fs::path config_;
};

TEST_F(Cli, GenDataWritesEveryDomain) {
  ASSERT_EQ(run_tiny("gen-data"), 0) << err();
  int domains = 0;
  for (const auto& e : fs::directory_iterator(root() / "data")) domains += e.is_directory();
  EXPECT_EQ(domains, 3);
  EXPECT_NE(out().find("style_0"), std::string::npos);
}

TEST_F(Cli, GenDataIsDeterministic) {
  ASSERT_EQ(run_tiny("gen-data", "-o '" + (dir_ / "a").string() + "'"), 0) << err();
  ASSERT_EQ(run_tiny("gen-data", "-o '" + (dir_ / "b").string() + "'"), 0) << err();
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path other = dir_ / "b" / fs::relative(e.path(), dir_ / "a");
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other));
  }
}

TEST_F(Cli, SingleClassConfigIsAUsageError) {
  std::ofstream(config_) << R"({"synthetic": {"num_classes": 1}})";
  EXPECT_EQ(run_tiny("gen-data"), 2);
  EXPECT_FALSE(err().empty());
}

TEST_F(Cli, UnknownConfigKeyIsAUsageError) {
  std::ofstream(config_) << R"({"train": {"stepz": 3}})";
  EXPECT_EQ(run_tiny("train"), 2);
  EXPECT_NE(err().find("stepz"), std::string::npos);
}

TEST_F(Cli, TrainWritesRunArtifacts) {
  ASSERT_EQ(run_tiny("train", "--target style_1"), 0) << err();
  const fs::path run_dir = root() / "train" / "full_comb" / "style_1" / "seed_0";
  for (const char* f : {"config.json", "history.jsonl", "trace.csv", "selection.json"}) {
    EXPECT_TRUE(fs::exists(run_dir / f)) << f;
  }
  const json echo = json::parse(slurp(run_dir / "config.json"));
  EXPECT_EQ(echo["train"]["seed"], 0);
  const json sel = json::parse(slurp(run_dir / "selection.json"));
  for (const char* m : {"TDVS", "Oracle"}) {
    const std::string id = sel[m]["checkpoint_id"];
    EXPECT_TRUE(fs::exists(run_dir / "checkpoints" / (id + ".ckpt"))) << id;
  }
  std::ifstream hist(run_dir / "history.jsonl");
  int lines = 0;
  for (std::string line; std::getline(hist, line);) ++lines;
  EXPECT_EQ(lines, 2);
}

// The tool and this test are separate binaries; float rounding must not
// depend on which one runs the library.
TEST_F(Cli, TrainTraceMatchesInProcessTraining) {
  constexpr const char* kConfig = R"({
    "dataset": {"image_size": 16},
    "synthetic": {"n_per_cell": 20},
    "encoder": {"widths": [16, 32, 64], "embedding_dim": 64},
    "train": {"steps": 30, "eval_every": 30}
  })";
  std::ofstream(config_) << kConfig;
  ASSERT_EQ(run_tiny("train", "--target style_1"), 0) << err();
  cddg::RunConfig config = cddg::run_config_from_json(json::parse(kConfig));
  const cddg::DGDataset ds = cddg::materialize_dataset(config);
  const cddg::TrainResult r =
      cddg::train(config.train, cddg::leave_one_out(ds, "style_1", 0), ds);
  std::ifstream trace(root() / "train" / "full_comb" / "style_1" / "seed_0" / "trace.csv");
  std::string line;
  std::getline(trace, line);
  for (const cddg::LossComponents& l : r.history.trace) {
    ASSERT_TRUE(std::getline(trace, line));
    EXPECT_EQ(std::stod(line.substr(line.rfind(',') + 1)), l.total) << line;
  }
}

TEST_F(Cli, TrainRejectsUnknownDomainAndVariant) {
  EXPECT_EQ(run_tiny("train", "--target nowhere"), 2);
  EXPECT_NE(err().find("nowhere"), std::string::npos);
  EXPECT_EQ(run_tiny("train", "--variant best"), 2);
}

TEST_F(Cli, BenchmarkAndAblateShapes) {
  ASSERT_EQ(run_tiny("benchmark", "--seeds 0,1"), 0) << err();
  const fs::path bench = root() / "benchmark" / "full_comb";
  std::ifstream rec(bench / "records.jsonl");
  int lines = 0;
  for (std::string line; std::getline(rec, line);) ++lines;
  EXPECT_EQ(lines, 3 * 2 * 2);
  EXPECT_TRUE(fs::exists(bench / "table.txt"));

  ASSERT_EQ(run_tiny("ablate", "--seeds 0"), 0) << err();
  const std::string table = slurp(root() / "ablation" / "table.txt");
  for (const char* label : {"CDDG", "w/ L_dscl_ind", "w/o L_dscl_comb", "w/o L_ce_dis"}) {
    EXPECT_NE(table.find(label), std::string::npos) << label;
  }
}

TEST_F(Cli, ProbeAndExportReadCheckpoints) {
  ASSERT_EQ(run_tiny("train", "--target style_0"), 0) << err();
  const fs::path ckpt =
      root() / "train" / "full_comb" / "style_0" / "seed_0" / "checkpoints" / "step_000010.ckpt";
  ASSERT_TRUE(fs::exists(ckpt));
  ASSERT_EQ(run_tiny("probe", "--checkpoint '" + ckpt.string() + "' --target style_0 -o '" +
                                  (dir_ / "probe.json").string() + "'"),
            0)
      << err();
  EXPECT_EQ(json::parse(slurp(dir_ / "probe.json"))["reports"].size(), 4u);
  const fs::path csv = dir_ / "emb.csv";
  ASSERT_EQ(run_tiny("export", "--checkpoint '" + ckpt.string() + "' --target style_0 -o '" +
                                   csv.string() + "' --emit-plot-data"),
            0)
      << err();
  std::ifstream in(csv);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 1 + 2 * 3 * 5);
  EXPECT_TRUE(fs::exists(dir_ / "emb.plot.csv"));
}

TEST_F(Cli, VerifyPassesAndCatchesInjectedFault) {
  EXPECT_EQ(run("verify"), 0) << out();
  EXPECT_EQ(run("verify --inject-fault scl-denominator-sign"), 1);
  EXPECT_NE(out().find("FAIL"), std::string::npos);
  EXPECT_EQ(run("verify --inject-fault nonsense"), 2);
}

TEST_F(Cli, MissingConfigFileIsAUsageError) {
  EXPECT_EQ(run("train -c '" + (dir_ / "absent.json").string() + "'"), 2);
}

}  // namespace
