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
#ifndef CDDG_TOOLS_COMMANDS_HPP_
#define CDDG_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cddg::cli {

// Bad flags or arguments; mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;  // empty: all defaults
};

struct GenDataArgs {
  CommonArgs common;
  std::string out;  // default <output root>/data
};

struct TrainArgs {
  CommonArgs common;
  std::optional<std::string> target;
  std::optional<std::string> variant;
  std::optional<std::uint64_t> seed;
  std::string out;  // default <root>/train/<variant>/<target>/seed_<s>
};

struct BenchmarkArgs {
  CommonArgs common;
  std::vector<std::uint64_t> seeds;  // empty: from config
  std::optional<std::string> variant;
  std::optional<int> workers;
  std::string out;
};

struct ProbeArgs {
  CommonArgs common;
  std::string checkpoint;
  std::optional<std::string> target;
  std::optional<std::uint64_t> seed;
  std::string out;  // optional JSON report path
};

struct ExportArgs {
  CommonArgs common;
  std::string checkpoint;
  std::optional<std::string> target;
  std::optional<std::uint64_t> seed;
  std::string split = "target";  // target | source_train | source_val | all
  std::string out;
  bool emit_plot_data = false;
};

struct VerifyArgs {
  std::string inject_fault;  // empty or "scl-denominator-sign"
  std::uint64_t seed = 0;
};

int cmd_gen_data(const GenDataArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_benchmark(const BenchmarkArgs& args);
int cmd_ablate(const BenchmarkArgs& args);
int cmd_probe(const ProbeArgs& args);
int cmd_export(const ExportArgs& args);
int cmd_verify(const VerifyArgs& args);

}  // namespace cddg::cli

#endif  // CDDG_TOOLS_COMMANDS_HPP_
