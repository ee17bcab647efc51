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
#include <benchmark/benchmark.h>

#include "cddg/augment.hpp"
#include "cddg/optimizer.hpp"
#include "cddg/training.hpp"

namespace {

using namespace cddg;

// One optimizer step of the full objective at a given image size.
void BM_TrainStep(benchmark::State& state) {
  SyntheticSpec spec;
  spec.image_size = static_cast<int>(state.range(0));
  spec.n_per_cell = 20;
  const DGDataset ds = generate_synthetic(spec);
  const SplitPlan plan = leave_one_out(ds, ds.domain_names.front(), 0);
  TrainConfig config;
  config.encoder.input = ds.image_shape;
  config.encoder.widths = {16, 32, 64};
  config.encoder.embedding_dim = 64;
  ModelBundle bundle = init_bundle(config.encoder, ds.space, 0);
  const Objective objective = objective_for(config);
  BatchStream stream = make_batches(plan, ds, config.batch_size, config.augmentation, 0);
  AdamW opt({.learning_rate = config.learning_rate, .weight_decay = config.weight_decay});
  const std::vector<Parameter*> params = trainable_parameters(bundle, objective);
  for (auto _ : state) {
    const AugmentedBatch batch = stream.next();
    benchmark::DoNotOptimize(accumulate_gradients(bundle, batch, objective));
    opt.step(params);
  }
}
BENCHMARK(BM_TrainStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
