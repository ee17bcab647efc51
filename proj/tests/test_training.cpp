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

#include <cmath>
#include <fstream>

#include "cddg/checkpoint.hpp"
#include "cddg/errors.hpp"
#include "cddg/evaluation.hpp"
#include "cddg/optimizer.hpp"
#include "cddg/training.hpp"
#include "test_util.hpp"

namespace cddg {
namespace {

namespace fs = std::filesystem;

class TinyRun : public ::testing::Test {
 protected:
  void SetUp() override {
    ds_ = generate_synthetic(testing::tiny_synthetic(10));
    plan_ = leave_one_out(ds_, ds_.domain_names[2], 0);
  }
  DGDataset ds_;
  SplitPlan plan_;
};

TrainHistory history_with(const std::vector<double>& val, const std::vector<double>& target) {
  TrainHistory h;
  for (std::size_t i = 0; i < val.size(); ++i) {
    EvalRecord r;
    r.step = static_cast<int>(i + 1) * 100;
    r.source_val_accuracy = val[i];
    r.target_accuracy = target[i];
    r.checkpoint_id = checkpoint_id_for_step(r.step);
    h.records.push_back(r);
  }
  return h;
}

TEST(Variant, NamesRoundTripAndUnknownIsRejected) {
  for (Variant v : {Variant::kFullComb, Variant::kFullInd, Variant::kDisentangleOnly,
                    Variant::kContrastiveOnly, Variant::kErm}) {
    EXPECT_EQ(variant_from_string(to_string(v)), v);
  }
  EXPECT_THROW(variant_from_string("full"), ConfigError);
  EXPECT_EQ(table_label(Variant::kFullInd), "w/ L_dscl_ind");
  EXPECT_EQ(table_label(Variant::kDisentangleOnly), "w/o L_dscl_comb");
  EXPECT_EQ(table_label(Variant::kContrastiveOnly), "w/o L_ce_dis");
}

TEST(TrainConfig, ValidateEnforcesStepOrdering) {
  TrainConfig c;
  c.steps = 50;
  c.eval_every = 100;
  EXPECT_THROW(c.validate(), ConfigError);
  c.eval_every = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.weight_decay = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Objective, VariantFlags) {
  TrainConfig c;
  c.variant = Variant::kDisentangleOnly;
  EXPECT_EQ(objective_for(c).alpha, 0.0);
  EXPECT_EQ(objective_for(c).contrastive, ContrastiveTerm::kNone);
  c.variant = Variant::kContrastiveOnly;
  EXPECT_FALSE(objective_for(c).domain_branch);
  EXPECT_EQ(objective_for(c).contrastive, ContrastiveTerm::kClassOnly);
  c.variant = Variant::kFullInd;
  EXPECT_EQ(objective_for(c).contrastive, ContrastiveTerm::kInd);
  EXPECT_TRUE(objective_for(c).domain_branch);
}

TEST(SelectModel, ArgmaxAndTies) {
  const TrainHistory h = history_with({0.5, 0.9, 0.7}, {0.6, 0.4, 0.8});
  EXPECT_EQ(select_model(h, SelectionMethod::kTdvs), "step_000200");
  EXPECT_EQ(select_model(h, SelectionMethod::kOracle), "step_000300");
  const TrainHistory flat = history_with({0.5, 0.5, 0.5}, {0.2, 0.2, 0.2});
  EXPECT_EQ(select_model(flat, SelectionMethod::kTdvs), "step_000100");
  EXPECT_EQ(select_model(flat, SelectionMethod::kOracle), "step_000100");
  EXPECT_THROW(select_model(TrainHistory{}, SelectionMethod::kTdvs), RangeError);
}

TEST_F(TinyRun, HistoryIsOrderedAndFinite) {
  const TrainResult r = train(testing::tiny_train_config(ds_, 30, 10), plan_, ds_);
  ASSERT_EQ(r.history.records.size(), 3u);
  ASSERT_EQ(r.history.trace.size(), 30u);
  for (std::size_t i = 1; i < r.history.records.size(); ++i) {
    EXPECT_GT(r.history.records[i].step, r.history.records[i - 1].step);
  }
  for (const LossComponents& l : r.history.trace) {
    EXPECT_TRUE(std::isfinite(l.total));
    EXPECT_NEAR(l.total, l.ce + l.dscl, 1e-12);
  }
  EXPECT_EQ(r.checkpoints.size(), 3u);
}

TEST_F(TinyRun, IdenticalConfigsGiveIdenticalTraces) {
  const TrainConfig c = testing::tiny_train_config(ds_, 20, 10);
  const TrainResult a = train(c, plan_, ds_);
  const TrainResult b = train(c, plan_, ds_);
  ASSERT_EQ(a.history.trace.size(), b.history.trace.size());
  for (std::size_t i = 0; i < a.history.trace.size(); ++i) {
    EXPECT_EQ(a.history.trace[i].total, b.history.trace[i].total);
  }
  EXPECT_EQ(parameter_digest(a.checkpoints.back().bundle),
            parameter_digest(b.checkpoints.back().bundle));
}

TEST_F(TinyRun, DisentangleOnlyRecordsZeroContrastiveTerm) {
  TrainConfig c = testing::tiny_train_config(ds_, 10, 10);
  c.variant = Variant::kDisentangleOnly;
  const TrainResult r = train(c, plan_, ds_);
  for (const LossComponents& l : r.history.trace) {
    EXPECT_EQ(l.dscl, 0.0);
    EXPECT_EQ(l.total, l.ce);
  }
}

TEST_F(TinyRun, OneStepMovesAllFourNetworks) {
  TrainConfig c = testing::tiny_train_config(ds_, 1, 1);
  const ModelBundle before = init_bundle(c.encoder, ds_.space, c.seed);
  const TrainResult r = train(c, plan_, ds_);
  const ModelBundle& after = r.checkpoints.front().bundle;
  auto moved = [](std::vector<const Parameter*> a, std::vector<const Parameter*> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i]->value != b[i]->value) return true;
    }
    return false;
  };
  EXPECT_TRUE(moved(before.g_v.parameters(), after.g_v.parameters()));
  EXPECT_TRUE(moved(before.g_s.parameters(), after.g_s.parameters()));
  EXPECT_TRUE(moved(before.f_v.parameters(), after.f_v.parameters()));
  EXPECT_TRUE(moved(before.f_s.parameters(), after.f_s.parameters()));
}

TEST_F(TinyRun, ContrastiveTermNeverReachesClassifierHeads) {
  const TrainConfig c = testing::tiny_train_config(ds_);
  ModelBundle bundle = init_bundle(c.encoder, ds_.space, 0);
  BatchStream stream = make_batches(plan_, ds_, 8, {}, 0);
  for (ContrastiveTerm term :
       {ContrastiveTerm::kComb, ContrastiveTerm::kInd, ContrastiveTerm::kClassOnly}) {
    Objective o;
    o.class_ce_weight = 0.0;
    o.domain_ce_weight = 0.0;
    o.contrastive = term;
    accumulate_gradients(bundle, stream.next(), o);
    for (const Parameter* p : bundle.f_v.parameters()) {
      for (float g : p->grad) ASSERT_EQ(g, 0.0f);
    }
    for (const Parameter* p : bundle.f_s.parameters()) {
      for (float g : p->grad) ASSERT_EQ(g, 0.0f);
    }
    for (Parameter* p : bundle.parameters()) p->zero_grad();
  }
}

TEST_F(TinyRun, ContrastiveOnlyLeavesDomainBranchUntouched) {
  TrainConfig c = testing::tiny_train_config(ds_, 10, 10);
  c.variant = Variant::kContrastiveOnly;
  const ModelBundle before = init_bundle(c.encoder, ds_.space, c.seed);
  const TrainResult r = train(c, plan_, ds_);
  const ModelBundle& after = r.checkpoints.front().bundle;
  const auto a = before.parameters();
  const auto b = after.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool domain_side = a[i]->name.rfind("g_s", 0) == 0 || a[i]->name.rfind("f_s", 0) == 0;
    if (domain_side) { EXPECT_EQ(a[i]->value, b[i]->value) << a[i]->name; }
  }
  for (const LossComponents& l : r.history.trace) EXPECT_GT(l.dscl, 0.0);
}

TEST_F(TinyRun, DivergenceAbortsWithStepDiagnostic) {
  TrainConfig c = testing::tiny_train_config(ds_, 40, 40);
  c.learning_rate = 1e30;
  try {
    train(c, plan_, ds_);
    FAIL() << "expected NonFiniteLossError";
  } catch (const NonFiniteLossError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("ce="), std::string::npos);
  }
}

TEST_F(TinyRun, CheckpointRoundTripIsBitExact) {
  const fs::path dir = testing::scratch_dir("ckpt_roundtrip");
  TrainOptions options;
  options.checkpoint_dir = dir;
  const TrainConfig c = testing::tiny_train_config(ds_, 20, 10);
  const TrainResult r = train(c, plan_, ds_, options);
  for (const EvalRecord& rec : r.history.records) {
    EXPECT_TRUE(fs::exists(checkpoint_path(dir, rec.checkpoint_id))) << rec.checkpoint_id;
  }
  const Checkpoint& last = r.checkpoints.back();
  const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path(dir, last.id),
                                                  {.config_hash = r.config_hash,
                                                   .encoder = c.encoder});
  EXPECT_EQ(loaded.meta.step, last.step);
  EXPECT_EQ(loaded.meta.checkpoint_id, last.id);
  EXPECT_EQ(parameter_digest(loaded.bundle), parameter_digest(last.bundle));
  const ImageBatch images = gather_images(ds_, resolve(plan_, ds_).target_all);
  const Logits a = classify(last.bundle, encode(last.bundle, images));
  const Logits b = classify(loaded.bundle, encode(loaded.bundle, images));
  EXPECT_EQ(a.class_logits, b.class_logits);
  EXPECT_EQ(a.domain_logits, b.domain_logits);
  EXPECT_DOUBLE_EQ(loaded.meta.metrics.at("target_accuracy").get<double>(),
                   r.history.records.back().target_accuracy);
}

TEST_F(TinyRun, CheckpointMismatchesAreRejected) {
  const fs::path path = testing::scratch_dir("ckpt_mismatch") / "model.ckpt";
  const TrainConfig c = testing::tiny_train_config(ds_);
  const ModelBundle bundle = init_bundle(c.encoder, ds_.space, 0);
  save_checkpoint(bundle, {"abc123", "step_000001", 1, {}}, path);
  EXPECT_THROW(load_checkpoint(path, {.config_hash = "def456", .encoder = std::nullopt}),
               VersionError);
  EncoderSpec other = c.encoder;
  other.embedding_dim = 16;
  EXPECT_THROW(load_checkpoint(path, {.config_hash = std::nullopt, .encoder = other}),
               ConfigError);
  EXPECT_NO_THROW(load_checkpoint(path, {.config_hash = "abc123", .encoder = c.encoder}));

  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(0);
  f.write("XXXX", 4);
  f.close();
  EXPECT_THROW(load_checkpoint(path), IoError);
  EXPECT_THROW(load_checkpoint(path.parent_path() / "absent.ckpt"), IoError);
}

TEST(ConfigHash, ChangesWithAnyHyperparameter) {
  TrainConfig a;
  TrainConfig b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.loss.temperature = 0.2;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = a;
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(AdamW, StepMovesAgainstGradientAndClearsIt) {
  Parameter p("w", {2});
  p.value = {1.0f, -1.0f};
  p.grad = {0.5f, -0.5f};
  AdamW opt({.learning_rate = 0.1, .weight_decay = 0.0});
  opt.step({&p});
  EXPECT_NEAR(p.value[0], 0.9f, 1e-6f);
  EXPECT_NEAR(p.value[1], -0.9f, 1e-6f);
  EXPECT_EQ(p.grad[0], 0.0f);
  p.grad = {0.0f, 0.0f};
  AdamW decay({.learning_rate = 0.1, .weight_decay = 0.5});
  const float before = p.value[0];
  decay.step({&p});
  EXPECT_NEAR(p.value[0], before * (1.0f - 0.05f), 1e-6f);
}

TEST(Training, LossDecreasesOnTheSyntheticBenchmark) {
  SyntheticSpec spec;  // K=5, M=4, nuisance 1
  spec.image_size = 16;
  const DGDataset ds = generate_synthetic(spec);
  TrainConfig c;
  c.encoder.input = ds.image_shape;
  c.encoder.widths = {8, 16, 32};
  c.encoder.embedding_dim = 32;
  c.steps = 2000;
  c.eval_every = 1000;
  const TrainResult r = train(c, leave_one_out(ds, ds.domain_names[0], 0), ds);
  EXPECT_LT(r.history.trace.back().total, r.history.trace.front().total);
  EXPECT_GT(r.history.records.back().source_val_accuracy, 0.5);
}

}  // namespace
}  // namespace cddg
