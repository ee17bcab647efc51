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
#include "cddg/training.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "cddg/checkpoint.hpp"
#include "cddg/config.hpp"
#include "cddg/errors.hpp"
#include "cddg/evaluation.hpp"
#include "cddg/optimizer.hpp"

namespace cddg {

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::kFullComb: return "full_comb";
    case Variant::kFullInd: return "full_ind";
    case Variant::kDisentangleOnly: return "disentangle_only";
    case Variant::kContrastiveOnly: return "contrastive_only";
    case Variant::kErm: return "erm";
  }
  return "full_comb";
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : {Variant::kFullComb, Variant::kFullInd, Variant::kDisentangleOnly,
                    Variant::kContrastiveOnly, Variant::kErm}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name +
                    "' (expected full_comb, full_ind, disentangle_only, "
                    "contrastive_only or erm)");
}

std::string table_label(Variant variant) {
  switch (variant) {
    case Variant::kFullComb: return "CDDG";
    case Variant::kFullInd: return "w/ L_dscl_ind";
    case Variant::kDisentangleOnly: return "w/o L_dscl_comb";
    case Variant::kContrastiveOnly: return "w/o L_ce_dis";
    case Variant::kErm: return "ERM";
  }
  return "";
}

std::string to_string(SelectionMethod method) {
  return method == SelectionMethod::kTdvs ? "TDVS" : "Oracle";
}

SelectionMethod selection_method_from_string(const std::string& name) {
  if (name == "TDVS" || name == "tdvs") return SelectionMethod::kTdvs;
  if (name == "Oracle" || name == "oracle") return SelectionMethod::kOracle;
  throw ConfigError("unknown selection method '" + name + "'");
}

void TrainConfig::validate() const {
  loss.validate();
  encoder.validate();
  augmentation.validate();
  if (batch_size < 2) throw ConfigError(fmt::format("batch_size must be >= 2, got {}", batch_size));
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (steps < eval_every) {
    throw ConfigError(fmt::format("steps ({}) must be >= eval_every ({})", steps, eval_every));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

std::string config_hash(const TrainConfig& config) {
  return fnv1a_hex(to_json(config).dump());
}

Objective objective_for(const TrainConfig& config) {
  Objective o;
  o.alpha = config.loss.alpha;
  o.temperature = config.loss.temperature;
  switch (config.variant) {
    case Variant::kFullComb: o.contrastive = ContrastiveTerm::kComb; break;
    case Variant::kFullInd: o.contrastive = ContrastiveTerm::kInd; break;
    case Variant::kDisentangleOnly:
      o.contrastive = ContrastiveTerm::kNone;
      o.alpha = 0.0;
      break;
    case Variant::kContrastiveOnly:
      o.contrastive = ContrastiveTerm::kClassOnly;
      o.domain_ce_weight = 0.0;
      o.domain_branch = false;
      break;
    case Variant::kErm:
      o.contrastive = ContrastiveTerm::kNone;
      o.alpha = 0.0;
      o.domain_ce_weight = 0.0;
      o.domain_branch = false;
      break;
  }
  return o;
}

std::vector<Parameter*> trainable_parameters(ModelBundle& bundle, const Objective& objective) {
  if (objective.domain_branch) return bundle.parameters();
  std::vector<Parameter*> out = bundle.g_v.parameters();
  for (auto* p : bundle.f_v.parameters()) out.push_back(p);
  return out;
}

namespace {

struct BranchPass {
  EncoderTape tape;
  NormalizedFeatures features;
  MatrixF z_float;
  Matrix logits;
  Matrix d_logits;
};

void forward_branch(const Encoder& encoder, const Dense& head, const ImageBatch& images,
                    BranchPass& pass) {
  pass.features = normalize_features(encoder.forward(images, &pass.tape));
  pass.z_float = pass.features.z.cast<float>();
  pass.logits = head.forward(pass.z_float).cast<double>();
}

void backward_branch(Encoder& encoder, Dense& head, BranchPass& pass,
                     double ce_weight, const Matrix* d_z_contrastive, double alpha) {
  Matrix d_z = Matrix::Zero(pass.features.z.rows(), pass.features.z.cols());
  if (ce_weight != 0.0) {
    const MatrixF d_logits = (ce_weight * pass.d_logits).cast<float>();
    d_z += head.backward(pass.z_float, d_logits, true).cast<double>();
  }
  if (d_z_contrastive != nullptr && alpha != 0.0) d_z += alpha * *d_z_contrastive;
  encoder.backward(normalize_backward(pass.features, d_z), pass.tape);
}

}  // namespace

LossComponents accumulate_gradients(ModelBundle& bundle, const AugmentedBatch& batch,
                                    const Objective& objective) {
  const bool domain = objective.domain_branch;
  BranchPass v, s;
  forward_branch(bundle.g_v, bundle.f_v, batch.images, v);
  if (domain) forward_branch(bundle.g_s, bundle.f_s, batch.images, s);

  LossComponents loss;
  if (objective.class_ce_weight != 0.0) {
    loss.ce += objective.class_ce_weight *
               cross_entropy(v.logits, batch.class_labels, &v.d_logits);
  }
  if (domain && objective.domain_ce_weight != 0.0) {
    loss.ce += objective.domain_ce_weight *
               cross_entropy(s.logits, batch.domain_labels, &s.d_logits);
  }

  DualGradient dual;
  Matrix d_single;
  const Matrix* d_z_v = nullptr;
  const Matrix* d_z_s = nullptr;
  switch (objective.contrastive) {
    case ContrastiveTerm::kNone: break;
    case ContrastiveTerm::kComb:
    case ContrastiveTerm::kInd: {
      if (!domain) throw ConfigError("dual contrastive terms need the domain branch");
      DualEmbeddings d{v.features.z, s.features.z, batch.class_labels, batch.domain_labels};
      loss.dscl = objective.contrastive == ContrastiveTerm::kComb
                      ? dscl_comb(d, bundle.space, objective.temperature, &dual)
                      : dscl_ind(d, objective.temperature, &dual);
      d_z_v = &dual.d_z_v;
      d_z_s = &dual.d_z_s;
      break;
    }
    case ContrastiveTerm::kClassOnly:
      loss.dscl = sup_contrastive(v.features.z, batch.class_labels, objective.temperature,
                                  &d_single);
      d_z_v = &d_single;
      break;
  }
  loss.total = total_loss(loss.ce, loss.dscl, objective.alpha);
  if (!std::isfinite(loss.total) || !std::isfinite(loss.ce) || !std::isfinite(loss.dscl)) {
    throw NonFiniteLossError(fmt::format("non-finite loss: ce={} dscl={} total={}",
                                         loss.ce, loss.dscl, loss.total));
  }

  backward_branch(bundle.g_v, bundle.f_v, v, objective.class_ce_weight, d_z_v, objective.alpha);
  if (domain) {
    backward_branch(bundle.g_s, bundle.f_s, s, objective.domain_ce_weight, d_z_s,
                    objective.alpha);
  }
  return loss;
}

nlohmann::json to_json(const EvalRecord& r) {
  return {{"step", r.step},
          {"train_ce", r.train_loss.ce},
          {"train_dscl", r.train_loss.dscl},
          {"train_total", r.train_loss.total},
          {"source_val_accuracy", r.source_val_accuracy},
          {"target_accuracy", r.target_accuracy},
          {"checkpoint_id", r.checkpoint_id}};
}

void write_history(const TrainHistory& history, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write history: " + path.string());
  for (const EvalRecord& r : history.records) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::string checkpoint_id_for_step(int step) { return fmt::format("step_{:06}", step); }

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / (id + ".ckpt");
}

const Checkpoint& TrainResult::checkpoint(const std::string& id) const {
  for (const Checkpoint& c : checkpoints) {
    if (c.id == id) return c;
  }
  throw RangeError("no checkpoint with id '" + id + "'");
}

TrainResult train(const TrainConfig& config, const SplitPlan& plan, const DGDataset& ds,
                  const TrainOptions& options) {
  config.validate();
  if (config.encoder.input != ds.image_shape) {
    throw ShapeError("encoder input " + to_string(config.encoder.input) +
                     " does not match dataset images " + to_string(ds.image_shape));
  }
  const SplitIndices split = resolve(plan, ds);
  const Objective objective = objective_for(config);

  TrainResult result;
  result.config_hash = config_hash(config);
  ModelBundle bundle = init_bundle(config.encoder, ds.space, config.seed);
  AdamW optimizer({.learning_rate = config.learning_rate, .weight_decay = config.weight_decay});
  const std::vector<Parameter*> params = trainable_parameters(bundle, objective);
  BatchStream stream(ds, split.source_train, config.batch_size, config.augmentation, config.seed);

  if (options.checkpoint_dir) std::filesystem::create_directories(*options.checkpoint_dir);

  LossComponents window;
  int window_steps = 0;
  for (int step = 1; step <= config.steps; ++step) {
    const AugmentedBatch batch = stream.next();
    LossComponents loss;
    try {
      loss = accumulate_gradients(bundle, batch, objective);
    } catch (const NonFiniteLossError& e) {
      throw NonFiniteLossError(fmt::format("step {}: {}", step, e.what()));
    }
    optimizer.step(params);
    result.history.trace.push_back(loss);
    window.ce += loss.ce;
    window.dscl += loss.dscl;
    window.total += loss.total;
    ++window_steps;

    if (step % config.eval_every != 0) continue;
    EvalRecord record;
    record.step = step;
    record.train_loss = {window.ce / window_steps, window.dscl / window_steps,
                         window.total / window_steps};
    record.source_val_accuracy =
        split.source_val.empty() ? 0.0 : accuracy(bundle, ds, split.source_val);
    record.target_accuracy =
        split.target_all.empty() ? 0.0 : accuracy(bundle, ds, split.target_all);
    record.checkpoint_id = checkpoint_id_for_step(step);
    window = {};
    window_steps = 0;

    if (options.checkpoint_dir) {
      CheckpointMeta meta{result.config_hash, record.checkpoint_id, step,
                          {{"source_val_accuracy", record.source_val_accuracy},
                           {"target_accuracy", record.target_accuracy},
                           {"train_total_loss", record.train_loss.total}}};
      save_checkpoint(bundle, meta, checkpoint_path(*options.checkpoint_dir, record.checkpoint_id));
    }
    result.checkpoints.push_back({record.checkpoint_id, step, bundle});
    result.history.records.push_back(record);
    if (options.on_eval) options.on_eval(record);
  }
  return result;
}

const EvalRecord& select_record(const TrainHistory& history, SelectionMethod method) {
  if (history.records.empty()) throw RangeError("cannot select from an empty history");
  const EvalRecord* best = &history.records.front();
  auto metric = [method](const EvalRecord& r) {
    return method == SelectionMethod::kTdvs ? r.source_val_accuracy : r.target_accuracy;
  };
  for (const EvalRecord& r : history.records) {
    if (metric(r) > metric(*best)) best = &r;
  }
  return *best;
}

std::string select_model(const TrainHistory& history, SelectionMethod method) {
  return select_record(history, method).checkpoint_id;
}

}  // namespace cddg
