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
#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "cddg/checkpoint.hpp"
#include "cddg/config.hpp"
#include "cddg/errors.hpp"
#include "cddg/evaluation.hpp"
#include "cddg/export.hpp"
#include "cddg/probe.hpp"
#include "cddg/training.hpp"
#include "cddg/verify.hpp"

namespace cddg::cli {
namespace fs = std::filesystem;

namespace {

void log(const std::string& message) {
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%H:%M:%S", std::localtime(&now));
  std::fprintf(stderr, "[%s] %s\n", stamp, message.c_str());
}

RunConfig load_config(const CommonArgs& common) {
  if (common.config_path.empty()) return RunConfig{};
  return load_run_config(common.config_path);
}

fs::path output_root(const RunConfig& config) {
  if (const char* env = std::getenv("CDDG_OUTPUT_ROOT"); env != nullptr && *env != '\0') {
    return env;
  }
  return config.output_dir;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void set_variant(RunConfig& config, const std::string& name) {
  config.train.variant = variant_from_string(name);
  config.train.loss.variant = config.train.variant == Variant::kFullComb
                                  ? ContrastiveVariant::kComb
                              : config.train.variant == Variant::kFullInd
                                  ? ContrastiveVariant::kInd
                                  : ContrastiveVariant::kNone;
}

std::string resolve_target(const DGDataset& ds, const RunConfig& config,
                           const std::optional<std::string>& flag) {
  const std::string target = flag ? *flag : config.target;
  if (target.empty()) return ds.domain_names.front();
  for (const std::string& name : ds.domain_names) {
    if (name == target) return target;
  }
  throw UsageError(fmt::format("unknown domain '{}' (available: {})", target,
                               fmt::join(ds.domain_names, ", ")));
}

Json selection_json(const TrainResult& result) {
  Json j = {{"config_hash", result.config_hash}};
  for (SelectionMethod m : kSelectionMethods) {
    const EvalRecord& r = select_record(result.history, m);
    j[to_string(m)] = {{"checkpoint_id", r.checkpoint_id},
                       {"step", r.step},
                       {"source_val_accuracy", r.source_val_accuracy},
                       {"target_accuracy", r.target_accuracy}};
  }
  return j;
}

std::string trace_csv(const TrainHistory& history) {
  std::string out = "step,ce,dscl,total\n";
  for (std::size_t i = 0; i < history.trace.size(); ++i) {
    const LossComponents& l = history.trace[i];
    out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i + 1, l.ce, l.dscl, l.total);
  }
  return out;
}

std::string records_jsonl(const std::vector<RunRecord>& records) {
  std::string out;
  for (const RunRecord& r : records) out += to_json(r).dump() + "\n";
  return out;
}

Json cells_json(const std::vector<SummaryCell>& cells) {
  Json out = Json::array();
  for (const SummaryCell& c : cells) {
    out.push_back({{"target", c.target},
                   {"method", c.method},
                   {"mean", c.accuracy.mean},
                   {"std", c.accuracy.std},
                   {"n", c.accuracy.n},
                   {"formatted", format_mean_std(c.accuracy)}});
  }
  return out;
}

Json benchmark_json(const BenchmarkResult& r) {
  return {{"variant", r.variant},
          {"label", table_label(variant_from_string(r.variant))},
          {"seeds", r.seeds},
          {"targets", r.targets},
          {"num_records", r.records.size()},
          {"summary", cells_json(r.summary)},
          {"average", cells_json(r.average)}};
}

BenchmarkOptions benchmark_options(const RunConfig& config, const BenchmarkArgs& args,
                                   const fs::path& out) {
  BenchmarkOptions options;
  options.workers = args.workers ? *args.workers : config.workers;
  options.output_dir = out / "runs";
  options.log = log;
  return options;
}

std::vector<std::uint64_t> resolve_seeds(const RunConfig& config, const BenchmarkArgs& args) {
  return args.seeds.empty() ? config.seeds : args.seeds;
}

std::vector<std::size_t> split_indices(const SplitIndices& split, const std::string& name) {
  if (name == "target") return split.target_all;
  if (name == "source_train") return split.source_train;
  if (name == "source_val") return split.source_val;
  std::vector<std::size_t> all = split.source_train;
  all.insert(all.end(), split.source_val.begin(), split.source_val.end());
  all.insert(all.end(), split.target_all.begin(), split.target_all.end());
  return all;
}

}  // namespace

int cmd_gen_data(const GenDataArgs& args) {
  RunConfig config = load_config(args.common);
  if (config.dataset.kind != DatasetSource::Kind::kSynthetic) {
    throw UsageError("gen-data needs dataset.source = synthetic");
  }
  config.validate();
  const DGDataset ds = materialize_dataset(config);
  const fs::path out = args.out.empty() ? output_root(config) / "data" : fs::path(args.out);
  write_directory(ds, out);
  std::printf("wrote %zu images to %s\n", ds.examples.size(), out.string().c_str());
  std::printf("classes (K=%d): %s\n", ds.space.num_classes(),
              fmt::format("{}", fmt::join(ds.class_names, ", ")).c_str());
  std::printf("domains (M=%d): %s\n", ds.space.num_domains(),
              fmt::format("{}", fmt::join(ds.domain_names, ", ")).c_str());
  std::printf("combined label space: %d\n", ds.space.combined_size());
  return 0;
}

int cmd_train(const TrainArgs& args) {
  RunConfig config = load_config(args.common);
  if (args.variant) set_variant(config, *args.variant);
  if (args.seed) config.train.seed = *args.seed;
  const DGDataset ds = materialize_dataset(config);
  config.target = resolve_target(ds, config, args.target);
  config.validate();

  const fs::path dir = args.out.empty()
                           ? output_root(config) / "train" / to_string(config.train.variant) /
                                 config.target / fmt::format("seed_{}", config.train.seed)
                           : fs::path(args.out);
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(config));

  const SplitPlan plan = leave_one_out(ds, config.target, config.train.seed);
  TrainOptions options;
  options.checkpoint_dir = dir / "checkpoints";
  options.on_eval = [](const EvalRecord& r) {
    log(fmt::format("step {:>6}  loss {:.4f} (ce {:.4f}, dscl {:.4f})  val {:.3f}  target {:.3f}",
                    r.step, r.train_loss.total, r.train_loss.ce, r.train_loss.dscl,
                    r.source_val_accuracy, r.target_accuracy));
  };
  log(fmt::format("training {} on {} domains, target {}, seed {}", to_string(config.train.variant),
                  ds.space.num_domains() - 1, config.target, config.train.seed));
  const TrainResult result = train(config.train, plan, ds, options);

  write_history(result.history, dir / "history.jsonl");
  write_text(dir / "trace.csv", trace_csv(result.history));
  const Json selection = selection_json(result);
  write_json(dir / "selection.json", selection);
  for (SelectionMethod m : kSelectionMethods) {
    const Json& s = selection.at(to_string(m));
    std::printf("%-6s checkpoint %s  target accuracy %.4f\n", to_string(m).c_str(),
                s.at("checkpoint_id").get<std::string>().c_str(),
                s.at("target_accuracy").get<double>());
  }
  std::printf("run directory: %s\n", dir.string().c_str());
  return 0;
}

int cmd_benchmark(const BenchmarkArgs& args) {
  RunConfig config = load_config(args.common);
  if (args.variant) set_variant(config, *args.variant);
  config.seeds = resolve_seeds(config, args);
  if (args.workers) config.workers = *args.workers;
  config.validate();
  const DGDataset ds = materialize_dataset(config);
  const fs::path out = args.out.empty()
                           ? output_root(config) / "benchmark" / to_string(config.train.variant)
                           : fs::path(args.out);
  fs::create_directories(out);
  write_json(out / "config.json", to_json(config));

  const BenchmarkResult result =
      run_benchmark(config.train, ds, config.seeds, benchmark_options(config, args, out));
  write_text(out / "records.jsonl", records_jsonl(result.records));
  write_json(out / "summary.json", benchmark_json(result));
  const std::string table = render_benchmark_table(result);
  write_text(out / "table.txt", table);
  std::printf("%s", table.c_str());
  std::printf("%zu records written to %s\n", result.records.size(),
              (out / "records.jsonl").string().c_str());
  return 0;
}

int cmd_ablate(const BenchmarkArgs& args) {
  RunConfig config = load_config(args.common);
  config.seeds = resolve_seeds(config, args);
  if (args.workers) config.workers = *args.workers;
  config.validate();
  const DGDataset ds = materialize_dataset(config);
  const fs::path out =
      args.out.empty() ? output_root(config) / "ablation" : fs::path(args.out);
  fs::create_directories(out);
  write_json(out / "config.json", to_json(config));

  const AblationResult result =
      run_ablation(config.train, ds, config.seeds, benchmark_options(config, args, out));
  std::vector<RunRecord> all;
  Json variants = Json::array();
  for (const BenchmarkResult& r : result.variants) {
    all.insert(all.end(), r.records.begin(), r.records.end());
    variants.push_back(benchmark_json(r));
  }
  Json flags = Json::array();
  for (const TrendFlag& f : result.flags) {
    flags.push_back({{"name", f.name},
                     {"lhs", f.lhs},
                     {"rhs", f.rhs},
                     {"lhs_value", f.lhs_value},
                     {"rhs_value", f.rhs_value},
                     {"holds", f.holds},
                     {"method", "TDVS"}});
  }
  write_text(out / "records.jsonl", records_jsonl(all));
  write_json(out / "summary.json", {{"variants", variants}, {"flags", flags}});
  const std::string table = render_ablation_table(result);
  write_text(out / "table.txt", table);
  std::printf("%s", table.c_str());
  return 0;
}

int cmd_probe(const ProbeArgs& args) {
  RunConfig config = load_config(args.common);
  config.validate();
  const DGDataset ds = materialize_dataset(config);
  const std::string target = resolve_target(ds, config, args.target);
  const LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint, {.config_hash = std::nullopt, .encoder = config.train.encoder});
  const SplitPlan plan = leave_one_out(ds, target, args.seed ? *args.seed : config.train.seed);
  const std::vector<ProbeReport> reports =
      probe_disentanglement(ckpt.bundle, plan, ds, config.probe);
  Json j = Json::array();
  for (const ProbeReport& r : reports) {
    std::printf("%s\n", describe(r).c_str());
    j.push_back({{"branch", to_string(r.branch)},
                 {"target", r.target == LabelKind::kClass ? "class" : "domain"},
                 {"accuracy", r.accuracy},
                 {"chance", r.chance},
                 {"num_train", r.num_train},
                 {"num_test", r.num_test}});
  }
  if (!args.out.empty()) {
    write_json(args.out, {{"checkpoint", args.checkpoint}, {"target_domain", target},
                          {"reports", j}});
  }
  return 0;
}

int cmd_export(const ExportArgs& args) {
  RunConfig config = load_config(args.common);
  config.validate();
  const DGDataset ds = materialize_dataset(config);
  const std::string target = resolve_target(ds, config, args.target);
  const LoadedCheckpoint ckpt = load_checkpoint(args.checkpoint, {.config_hash = std::nullopt, .encoder = config.train.encoder});
  const SplitPlan plan = leave_one_out(ds, target, args.seed ? *args.seed : config.train.seed);
  const std::vector<std::size_t> indices = split_indices(resolve(plan, ds), args.split);
  const fs::path out =
      args.out.empty() ? output_root(config) / "embeddings.csv" : fs::path(args.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const std::size_t rows = export_embeddings(ckpt.bundle, ds, indices, out);
  std::printf("wrote %zu rows to %s\n", rows, out.string().c_str());
  if (args.emit_plot_data) {
    fs::path plot = out;
    plot.replace_extension(".plot.csv");
    write_plot_data(project_2d(ckpt.bundle, ds, indices), plot);
    std::printf("wrote 2-D projection to %s\n", plot.string().c_str());
  }
  return 0;
}

int cmd_verify(const VerifyArgs& args) {
  const verify::Kernels kernels = args.inject_fault.empty()
                                      ? verify::Kernels{}
                                      : verify::fixtures::mutant_scl_denominator_sign();
  if (!args.inject_fault.empty()) std::printf("injected fault: %s\n", args.inject_fault.c_str());
  verify::Options options;
  options.seed = args.seed;
  const verify::Report report = verify::run_all(kernels, options);
  int failures = 0;
  for (const verify::Check& c : report.checks) {
    std::printf("%s\n", describe(c).c_str());
    failures += c.passed ? 0 : 1;
  }
  for (std::size_t g = 0; g < report.seconds.size(); ++g) {
    std::printf("group %zu: %.2f s\n", g + 1, report.seconds[g]);
  }
  std::printf("%zu checks, %d failed\n", report.checks.size(), failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace cddg::cli
