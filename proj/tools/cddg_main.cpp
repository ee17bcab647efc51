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
#include <cstdio>
#include <exception>
#include <functional>

#include <CLI11.hpp>

#include "cddg/errors.hpp"
#include "commands.hpp"

namespace {

void add_config(CLI::App* app, cddg::cli::CommonArgs& common) {
  app->add_option("-c,--config", common.config_path, "JSON config file (defaults if omitted)")
      ->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cddg::cli;
  CLI::App app{"Contrastive disentanglement for domain generalization"};
  app.require_subcommand(1);
  std::function<int()> run;

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Render the synthetic dataset to disk");
  add_config(gen_cmd, gen.common);
  gen_cmd->add_option("-o,--out", gen.out, "Dataset directory");
  gen_cmd->callback([&] { run = [&] { return cmd_gen_data(gen); }; });

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train one leave-one-domain-out run");
  add_config(train_cmd, train.common);
  train_cmd->add_option("--target", train.target, "Held-out domain name");
  train_cmd->add_option("--variant", train.variant,
                        "full_comb | full_ind | disentangle_only | contrastive_only | erm");
  train_cmd->add_option("--seed", train.seed, "Run seed (default 0)");
  train_cmd->add_option("-o,--out", train.out, "Run directory");
  train_cmd->callback([&] { run = [&] { return cmd_train(train); }; });

  BenchmarkArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Leave-one-domain-out over all targets");
  add_config(bench_cmd, bench.common);
  bench_cmd->add_option("--seeds", bench.seeds, "Comma-separated seeds")->delimiter(',');
  bench_cmd->add_option("--variant", bench.variant, "Training variant");
  bench_cmd->add_option("--workers", bench.workers, "Concurrent runs")->check(CLI::PositiveNumber);
  bench_cmd->add_option("-o,--out", bench.out, "Results directory");
  bench_cmd->callback([&] { run = [&] { return cmd_benchmark(bench); }; });

  BenchmarkArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Benchmark the four ablation variants");
  add_config(ablate_cmd, ablate.common);
  ablate_cmd->add_option("--seeds", ablate.seeds, "Comma-separated seeds")->delimiter(',');
  ablate_cmd->add_option("--workers", ablate.workers, "Concurrent runs")
      ->check(CLI::PositiveNumber);
  ablate_cmd->add_option("-o,--out", ablate.out, "Results directory");
  ablate_cmd->callback([&] { run = [&] { return cmd_ablate(ablate); }; });

  ProbeArgs probe;
  auto* probe_cmd = app.add_subcommand("probe", "Linear probes on frozen encoders");
  add_config(probe_cmd, probe.common);
  probe_cmd->add_option("--checkpoint", probe.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  probe_cmd->add_option("--target", probe.target, "Held-out domain name");
  probe_cmd->add_option("--seed", probe.seed, "Split seed (default 0)");
  probe_cmd->add_option("-o,--out", probe.out, "Write the reports as JSON");
  probe_cmd->callback([&] { run = [&] { return cmd_probe(probe); }; });

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "Write embeddings of both encoders as CSV");
  add_config(export_cmd, exp.common);
  export_cmd->add_option("--checkpoint", exp.checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  export_cmd->add_option("--target", exp.target, "Held-out domain name");
  export_cmd->add_option("--seed", exp.seed, "Split seed (default 0)");
  export_cmd->add_option("--split", exp.split, "Examples to export")
      ->check(CLI::IsMember({"target", "source_train", "source_val", "all"}));
  export_cmd->add_option("-o,--out", exp.out, "CSV path");
  export_cmd->add_flag("--emit-plot-data", exp.emit_plot_data,
                       "Also write a 2-D projection table next to the CSV");
  export_cmd->callback([&] { run = [&] { return cmd_export(exp); }; });

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the loss verification suite");
  verify_cmd->add_option("--inject-fault", verify.inject_fault, "Run against a broken kernel")
      ->check(CLI::IsMember({"scl-denominator-sign"}));
  verify_cmd->add_option("--seed", verify.seed, "Seed for the randomized checks");
  verify_cmd->callback([&] { run = [&] { return cmd_verify(verify); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run();
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const cddg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
