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
#ifndef CDDG_TRAINING_HPP_
#define CDDG_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cddg/augment.hpp"
#include "cddg/dataset.hpp"
#include "cddg/losses.hpp"
#include "cddg/networks.hpp"

namespace cddg {

// Training recipes. The first four are the ablation rows; kErm is the plain
// single-encoder cross-entropy baseline.
enum class Variant {
  kFullComb,         // ce_dis + alpha * dscl_comb
  kFullInd,          // ce_dis + alpha * dscl_ind
  kDisentangleOnly,  // ce_dis, alpha forced to 0
  kContrastiveOnly,  // one encoder: class CE + alpha * SCL on class labels
  kErm,              // one encoder: class CE
};

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);
// Row label used in ablation tables.
std::string table_label(Variant variant);

inline constexpr Variant kAblationVariants[] = {
    Variant::kFullComb, Variant::kFullInd, Variant::kDisentangleOnly,
    Variant::kContrastiveOnly};

struct TrainConfig {
  // temperature and alpha; loss.variant is derived from variant.
  LossConfig loss;
  EncoderSpec encoder;
  AugmentConfig augmentation;
  Variant variant = Variant::kFullComb;
  int batch_size = 32;  // N; each step sees 2N augmented rows
  int steps = 3000;
  int eval_every = 100;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Stable hex digest of the resolved configuration.
std::string config_hash(const TrainConfig& config);

enum class ContrastiveTerm { kNone, kComb, kInd, kClassOnly };

// Which terms enter the step loss, and with what weight.
struct Objective {
  double class_ce_weight = 1.0;
  double domain_ce_weight = 1.0;
  ContrastiveTerm contrastive = ContrastiveTerm::kComb;
  double alpha = 1.0;
  double temperature = 0.1;
  // When false, g_s and f_s are neither evaluated nor updated.
  bool domain_branch = true;
};

Objective objective_for(const TrainConfig& config);

struct LossComponents {
  double ce = 0.0;
  double dscl = 0.0;
  double total = 0.0;
};

// Forward + backward on one batch; adds parameter gradients into bundle.
// Throws NonFiniteLossError on NaN/Inf.
LossComponents accumulate_gradients(ModelBundle& bundle, const AugmentedBatch& batch,
                                    const Objective& objective);

// Parameters touched by the objective's networks.
std::vector<Parameter*> trainable_parameters(ModelBundle& bundle, const Objective& objective);

struct EvalRecord {
  int step = 0;
  LossComponents train_loss;  // mean over the steps since the previous record
  double source_val_accuracy = 0.0;
  double target_accuracy = 0.0;
  std::string checkpoint_id;
};

struct TrainHistory {
  std::vector<EvalRecord> records;
  std::vector<LossComponents> trace;  // one entry per step
};

struct Checkpoint {
  std::string id;
  int step = 0;
  ModelBundle bundle;
};

struct TrainOptions {
  // When set, every checkpoint is also written to <dir>/<id>.ckpt.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(const EvalRecord&)> on_eval;
};

struct TrainResult {
  std::vector<Checkpoint> checkpoints;
  TrainHistory history;
  std::string config_hash;

  const Checkpoint& checkpoint(const std::string& id) const;
};

TrainResult train(const TrainConfig& config, const SplitPlan& plan,
                  const DGDataset& ds, const TrainOptions& options = {});

// One JSON object per line: step, losses, accuracies, checkpoint id.
nlohmann::json to_json(const EvalRecord& record);
void write_history(const TrainHistory& history, const std::filesystem::path& path);

std::string checkpoint_id_for_step(int step);
std::filesystem::path checkpoint_path(const std::filesystem::path& dir,
                                      const std::string& id);

// TDVS selects on source-domain validation accuracy, Oracle on target-domain
// accuracy.
enum class SelectionMethod { kTdvs, kOracle };

std::string to_string(SelectionMethod method);
SelectionMethod selection_method_from_string(const std::string& name);

inline constexpr SelectionMethod kSelectionMethods[] = {SelectionMethod::kTdvs,
                                                        SelectionMethod::kOracle};

// Argmax of the method's metric; ties go to the earliest step.
const EvalRecord& select_record(const TrainHistory& history, SelectionMethod method);
std::string select_model(const TrainHistory& history, SelectionMethod method);

}  // namespace cddg

#endif  // CDDG_TRAINING_HPP_
