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
#ifndef CDDG_CONFIG_HPP_
#define CDDG_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cddg/augment.hpp"
#include "cddg/dataset.hpp"
#include "cddg/networks.hpp"
#include "cddg/probe.hpp"
#include "cddg/training.hpp"

namespace cddg {

using Json = nlohmann::json;

// JSON forms used by checkpoints and the config file. Every *_from_json
// rejects unknown keys and fills absent keys with defaults.
Json to_json(const ImageShape& shape);
Json to_json(const EncoderSpec& spec);
Json to_json(const AugmentConfig& config);
Json to_json(const SyntheticSpec& spec);
Json to_json(const TrainConfig& config);
Json to_json(const ProbeConfig& config);

EncoderSpec encoder_spec_from_json(const Json& j);
AugmentConfig augment_config_from_json(const Json& j);
SyntheticSpec synthetic_spec_from_json(const Json& j);
TrainConfig train_config_from_json(const Json& j);
ProbeConfig probe_config_from_json(const Json& j);

struct DatasetSource {
  enum class Kind { kSynthetic, kDirectory };
  Kind kind = Kind::kSynthetic;
  std::string root;  // directory datasets only
  int image_size = 32;
};

// The document accepted by the command-line tool. Layout:
//
//   {
//     "output_dir": "runs",
//     "dataset":   {"source": "synthetic" | "directory", "root": "", "image_size": 32},
//     "synthetic": {"num_classes", "num_domains", "n_per_cell",
//                   "nuisance_strength", "seed"},
//     "encoder":   {"architecture", "embedding_dim", "widths", "projection_head"},
//     "loss":      {"temperature", "alpha"},
//     "train":     {"variant", "batch_size", "steps", "eval_every",
//                   "learning_rate", "weight_decay", "seed", "target"},
//     "augmentation": {...AugmentConfig fields...},
//     "benchmark": {"seeds": [0, 1, 2], "workers": 1},
//     "probe":     {"iterations", "learning_rate", "l2"}
//   }
struct RunConfig {
  std::string output_dir = "runs";
  DatasetSource dataset;
  SyntheticSpec synthetic;
  TrainConfig train;
  std::string target;  // empty: first domain in lexicographic order
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int workers = 1;
  ProbeConfig probe;

  void validate() const;
};

RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Builds (or loads) the dataset described by config and fixes the encoder
// input shape to match it.
DGDataset materialize_dataset(RunConfig& config);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace cddg

#endif  // CDDG_CONFIG_HPP_
