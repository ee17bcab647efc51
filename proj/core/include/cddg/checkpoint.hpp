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
#ifndef CDDG_CHECKPOINT_HPP_
#define CDDG_CHECKPOINT_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cddg/networks.hpp"

namespace cddg {

// Checkpoint container layout (little-endian):
//
//   8 bytes   magic "CDDGCKPT"
//   u32       format version
//   u64       manifest length L
//   L bytes   JSON manifest: config hash, step, checkpoint id, metrics,
//             encoder spec, label space, tensor table (name, shape, offset)
//   u64       payload length P (bytes)
//   P bytes   float32 parameter values in tensor-table order
inline constexpr char kCheckpointMagic[8] = {'C', 'D', 'D', 'G', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string config_hash;
  std::string checkpoint_id;
  int step = 0;
  nlohmann::json metrics = nlohmann::json::object();
};

struct LoadedCheckpoint {
  ModelBundle bundle;
  CheckpointMeta meta;
};

// What the caller expects the file to contain; mismatches throw.
struct CheckpointExpectation {
  std::optional<std::string> config_hash;  // VersionError on mismatch
  std::optional<EncoderSpec> encoder;      // ConfigError on mismatch
};

void save_checkpoint(const ModelBundle& bundle, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const CheckpointExpectation& expect = {});

// FNV-1a over every parameter value; used to confirm frozen encoders.
std::string parameter_digest(const ModelBundle& bundle);

}  // namespace cddg

#endif  // CDDG_CHECKPOINT_HPP_
