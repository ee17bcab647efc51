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

#include <fstream>
#include <numeric>
#include <sstream>

#include "cddg/checkpoint.hpp"
#include "cddg/errors.hpp"
#include "cddg/evaluation.hpp"
#include "cddg/export.hpp"
#include "cddg/probe.hpp"
#include "test_util.hpp"

namespace cddg {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::size_t> all_indices(const DGDataset& ds) {
  std::vector<std::size_t> idx(ds.examples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

class Evaluated : public ::testing::Test {
 protected:
  void SetUp() override {
    ds_ = generate_synthetic(testing::tiny_synthetic(6));
    config_ = testing::tiny_train_config(ds_, 10, 5);
    bundle_ = init_bundle(config_.encoder, ds_.space, 0);
  }
  // Zero class weights with a single dominant bias predict  everywhere.
  void force_class(int label) {
    std::vector<Parameter*> head = bundle_.f_v.parameters();
    std::fill(head[0]->value.begin(), head[0]->value.end(), 0.0f);
    std::fill(head[1]->value.begin(), head[1]->value.end(), 0.0f);
    head[1]->value[static_cast<std::size_t>(label)] = 5.0f;
  }
  DGDataset ds_;
  TrainConfig config_;
  ModelBundle bundle_;
};

TEST_F(Evaluated, AccuracyAllCorrectAndChance) {
  force_class(1);
  std::vector<std::size_t> class1;
  for (std::size_t i = 0; i < ds_.examples.size(); ++i) {
    if (ds_.examples[i].class_label == 1) class1.push_back(i);
  }
  EXPECT_DOUBLE_EQ(accuracy(bundle_, ds_, class1), 1.0);
  // Balanced classes, constant prediction.
  EXPECT_NEAR(accuracy(bundle_, ds_, all_indices(ds_)), 1.0 / 3.0, 1e-12);
}

TEST_F(Evaluated, ZeroClassifierFallsBackToLowestLabel) {
  for (Parameter* p : bundle_.f_v.parameters()) std::fill(p->value.begin(), p->value.end(), 0.0f);
  EXPECT_NEAR(accuracy(bundle_, ds_, all_indices(ds_)), 1.0 / 3.0, 1e-12);
}

TEST_F(Evaluated, DuplicatedIndicesCountTwice) {
  const std::vector<std::size_t> idx = {0, 1, 2, 3};
  std::vector<std::size_t> twice = idx;
  twice.insert(twice.end(), idx.begin(), idx.end());
  EXPECT_DOUBLE_EQ(accuracy(bundle_, ds_, idx), accuracy(bundle_, ds_, twice));
  EXPECT_THROW(accuracy(bundle_, ds_, std::vector<std::size_t>{}), ContractError);
}

TEST_F(Evaluated, EmbeddingRowsAreUnitAndIndependentOfBatch) {
  const std::vector<std::size_t> idx = all_indices(ds_);
  const Matrix z = embed(bundle_, Branch::kDomain, ds_, idx);
  ASSERT_EQ(z.rows(), static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) EXPECT_NEAR(z.row(i).norm(), 1.0, 1e-6);
  const Matrix head = embed(bundle_, Branch::kDomain, ds_, std::span(idx).first(3));
  EXPECT_TRUE(head.isApprox(z.topRows(3), 1e-6));
}

TEST(MeanStd, SampleStatisticsAndFormat) {
  const std::vector<double> v = {0.9, 0.8, 0.85};
  const MeanStd m = mean_std(v);
  EXPECT_NEAR(m.mean, 0.85, 1e-12);
  EXPECT_NEAR(m.std, 0.05, 1e-12);
  EXPECT_EQ(m.n, 3);
  EXPECT_EQ(format_mean_std(m), "85.0 ± 5.0");
  const std::vector<double> one = {0.5};
  EXPECT_EQ(mean_std(one).std, 0.0);
  EXPECT_EQ(format_mean_std(mean_std(one)), "50.0 ± 0.0");
}

TEST(Summaries, AverageIsPerSeedMeanOverTargets) {
  std::vector<RunRecord> records;
  auto add = [&](const std::string& target, std::uint64_t seed, double acc) {
    records.push_back({"full_comb", target, "TDVS", seed, acc, "step_000010", 10, "h"});
  };
  add("a", 0, 0.6);
  add("b", 0, 0.8);
  add("a", 1, 0.4);
  add("b", 1, 0.6);
  const std::vector<SummaryCell> cells = summarize(records);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].target, "a");
  EXPECT_NEAR(cells[0].accuracy.mean, 0.5, 1e-12);
  const std::vector<SummaryCell> avg = summarize_average(records);
  ASSERT_EQ(avg.size(), 1u);
  // Per-seed averages are 0.7 and 0.5.
  EXPECT_NEAR(avg[0].accuracy.mean, 0.6, 1e-12);
  EXPECT_NEAR(avg[0].accuracy.std, std::sqrt(0.02), 1e-12);
}

TEST(RunRecord, JsonRoundTrip) {
  const RunRecord r{"erm", "sketch", "Oracle", 2, 0.625, "step_000300", 300, "abc"};
  const RunRecord back = run_record_from_json(to_json(r));
  EXPECT_EQ(back.variant, r.variant);
  EXPECT_EQ(back.target, r.target);
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.accuracy, r.accuracy);
  EXPECT_EQ(back.checkpoint_id, r.checkpoint_id);
}

TEST_F(Evaluated, BenchmarkShapeReproducibilityAndSummary) {
  const std::vector<std::uint64_t> seeds = {0, 1};
  const BenchmarkResult a = run_benchmark(config_, ds_, seeds);
  const std::size_t targets = ds_.domain_names.size();
  ASSERT_EQ(a.records.size(), targets * seeds.size() * 2);
  ASSERT_EQ(a.summary.size(), targets * 2);
  ASSERT_EQ(a.average.size(), 2u);
  for (const RunRecord& r : a.records) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    EXPECT_TRUE(r.method == "TDVS" || r.method == "Oracle");
  }
  for (const SummaryCell& cell : a.summary) {
    std::vector<double> values;
    for (const RunRecord& r : a.records) {
      if (r.target == cell.target && r.method == cell.method) values.push_back(r.accuracy);
    }
    ASSERT_EQ(values.size(), seeds.size());
    EXPECT_NEAR(mean_std(values).mean, cell.accuracy.mean, 1e-9);
    EXPECT_NEAR(mean_std(values).std, cell.accuracy.std, 1e-9);
  }
  const BenchmarkResult b = run_benchmark(config_, ds_, seeds);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].accuracy, b.records[i].accuracy);
    EXPECT_EQ(a.records[i].checkpoint_id, b.records[i].checkpoint_id);
  }
}

TEST_F(Evaluated, WorkerCountDoesNotChangeResults) {
  const std::vector<std::uint64_t> seeds = {0, 1};
  BenchmarkOptions parallel;
  parallel.workers = 3;
  const BenchmarkResult a = run_benchmark(config_, ds_, seeds);
  const BenchmarkResult b = run_benchmark(config_, ds_, seeds, parallel);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].target, b.records[i].target);
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].accuracy, b.records[i].accuracy);
  }
}

TEST_F(Evaluated, OracleNeverBelowTdvs) {
  const std::vector<std::uint64_t> seeds = {0};
  const BenchmarkResult r = run_benchmark(config_, ds_, seeds);
  for (std::size_t i = 0; i + 1 < r.records.size(); i += 2) {
    ASSERT_EQ(r.records[i].method, "TDVS");
    EXPECT_GE(r.records[i + 1].accuracy, r.records[i].accuracy);
  }
}

TEST_F(Evaluated, AblationTableHasFourVariantsAndFlags) {
  config_.steps = 5;
  const std::vector<std::uint64_t> seeds = {0};
  const AblationResult r = run_ablation(config_, ds_, seeds);
  ASSERT_EQ(r.variants.size(), 4u);
  EXPECT_EQ(r.flags.size(), 2u);
  for (const BenchmarkResult& v : r.variants) EXPECT_EQ(v.average.size(), 2u);
  const std::string table = render_ablation_table(r);
  for (const char* label : {"CDDG", "w/ L_dscl_ind", "w/o L_dscl_comb", "w/o L_ce_dis"}) {
    EXPECT_NE(table.find(label), std::string::npos) << label;
  }
  EXPECT_THROW(find_variant(r, Variant::kErm), RangeError);
}

TEST(Probe, RejectsSingleClass) {
  const Matrix x = Matrix::Random(6, 3);
  const std::vector<int> y(6, 2);
  EXPECT_THROW(fit_linear_probe(x, y, {}), ContractError);
  const std::vector<int> short_y = {0, 1};
  EXPECT_THROW(fit_linear_probe(x, short_y, {}), ShapeError);
}

TEST(Probe, ConstantFeaturesScoreChance) {
  const Matrix x = Matrix::Constant(8, 4, 0.3);
  const std::vector<int> y = {0, 1, 2, 3, 0, 1, 2, 3};
  const LinearProbe p = fit_linear_probe(x, y, {});
  EXPECT_DOUBLE_EQ(probe_accuracy(p, x, y), 0.25);
}

TEST(Probe, SeparableFeaturesScorePerfect) {
  Matrix x(6, 2);
  x << 1, 0, 1.1, 0.1, 0.9, -0.1, 0, 1, 0.1, 1.2, -0.1, 0.8;
  const std::vector<int> y = {5, 5, 5, 9, 9, 9};
  const LinearProbe p = fit_linear_probe(x, y, {});
  EXPECT_EQ(p.label_set, (std::vector<int>{5, 9}));
  EXPECT_DOUBLE_EQ(probe_accuracy(p, x, y), 1.0);
}

TEST_F(Evaluated, ProbingLeavesEncodersFrozen) {
  const SplitPlan plan = leave_one_out(ds_, ds_.domain_names[0], 0);
  const std::string before = parameter_digest(bundle_);
  const std::vector<ProbeReport> reports = probe_disentanglement(bundle_, plan, ds_);
  EXPECT_EQ(parameter_digest(bundle_), before);
  ASSERT_EQ(reports.size(), 4u);
  for (const ProbeReport& r : reports) {
    EXPECT_GT(r.num_train, 0);
    EXPECT_GT(r.num_test, 0);
    EXPECT_NEAR(r.chance, r.target == LabelKind::kClass ? 1.0 / 3.0 : 0.5, 1e-12);
  }
}

TEST_F(Evaluated, ExportWritesTwoUnitRowsPerExample) {
  const fs::path dir = testing::scratch_dir("export");
  const std::vector<std::size_t> idx = {0, 3, 7};
  EXPECT_EQ(export_embeddings(bundle_, ds_, idx, dir / "a.csv"), 6u);
  std::ifstream in(dir / "a.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("example_id,branch,class_label,domain_label,e0,", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 4; ++k) std::getline(ss, cell, ',');
    double sq = 0.0;
    int dims = 0;
    while (std::getline(ss, cell, ',')) {
      sq += std::stod(cell) * std::stod(cell);
      ++dims;
    }
    EXPECT_EQ(dims, config_.encoder.embedding_dim);
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  export_embeddings(bundle_, ds_, idx, dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_THROW(export_embeddings(bundle_, ds_, idx, dir / "missing" / "x.csv"), IoError);
}

TEST_F(Evaluated, PlotProjectionCoversBothBranches) {
  const std::vector<std::size_t> idx = all_indices(ds_);
  const std::vector<PlotPoint> pts = project_2d(bundle_, ds_, idx);
  ASSERT_EQ(pts.size(), 2 * idx.size());
  const fs::path path = testing::scratch_dir("plot") / "p.csv";
  write_plot_data(pts, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "example_id,branch,class_label,domain_label,x,y");
}

}  // namespace
}  // namespace cddg
