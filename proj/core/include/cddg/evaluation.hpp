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
#ifndef CDDG_EVALUATION_HPP_
#define CDDG_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cddg/dataset.hpp"
#include "cddg/networks.hpp"
#include "cddg/training.hpp"

namespace cddg {

inline constexpr int kEvalChunk = 128;

// Embeddings of ds.examples[indices], computed in chunks without augmentation.
Matrix embed(const ModelBundle& bundle, Branch branch, const DGDataset& ds,
             std::span<const std::size_t> indices);

// Fraction of examples whose f_v(g_v(x)) argmax equals the class label.
double accuracy(const ModelBundle& bundle, const DGDataset& ds,
                std::span<const std::size_t> indices);

struct RunRecord {
  std::string variant;
  std::string target;
  std::string method;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::string checkpoint_id;
  int step = 0;
  std::string config_hash;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  int n = 0;
};

MeanStd mean_std(std::span<const double> values);

// Percent with one decimal, e.g. "87.5 ± 0.5".
std::string format_mean_std(const MeanStd& value);

struct SummaryCell {
  std::string target;
  std::string method;
  MeanStd accuracy;
};

struct BenchmarkOptions {
  int workers = 1;
  // When set, run <variant>/<target>/seed_<s>/ directories receive
  // checkpoints and history under this root.
  std::optional<std::filesystem::path> output_dir;
  std::function<void(const std::string&)> log;
};

struct BenchmarkResult {
  std::string variant;
  std::vector<std::string> targets;
  std::vector<std::uint64_t> seeds;
  std::vector<RunRecord> records;  // target-major, then seed, then method
  std::vector<SummaryCell> summary;  // target-major, then method
  std::vector<SummaryCell> average;  // per method; mean over targets per seed
};

BenchmarkResult run_benchmark(const TrainConfig& config, const DGDataset& ds,
                              std::span<const std::uint64_t> seeds,
                              const BenchmarkOptions& options = {});

std::vector<SummaryCell> summarize(std::span<const RunRecord> records);
std::vector<SummaryCell> summarize_average(std::span<const RunRecord> records);

std::string render_benchmark_table(const BenchmarkResult& result);

struct TrendFlag {
  std::string name;
  std::string lhs;
  std::string rhs;
  double lhs_value = 0.0;
  double rhs_value = 0.0;
  bool holds = false;
};

struct AblationResult {
  std::vector<BenchmarkResult> variants;  // ordered as kAblationVariants
  std::vector<TrendFlag> flags;           // under TDVS
};

AblationResult run_ablation(const TrainConfig& base, const DGDataset& ds,
                            std::span<const std::uint64_t> seeds,
                            const BenchmarkOptions& options = {});

std::vector<TrendFlag> trend_flags(const AblationResult& result);

const BenchmarkResult& find_variant(const AblationResult& result, Variant variant);
double average_accuracy(const BenchmarkResult& result, SelectionMethod method);

std::string render_ablation_table(const AblationResult& result);
std::string describe(const TrendFlag& flag);

}  // namespace cddg

#endif  // CDDG_EVALUATION_HPP_
