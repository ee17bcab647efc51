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
#include "cddg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "cddg/errors.hpp"

namespace cddg {

Matrix embed(const ModelBundle& bundle, Branch branch, const DGDataset& ds,
             std::span<const std::size_t> indices) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), bundle.spec.embedding_dim);
  for (std::size_t begin = 0; begin < indices.size(); begin += kEvalChunk) {
    const std::size_t n = std::min<std::size_t>(kEvalChunk, indices.size() - begin);
    const Matrix z = encode_branch(bundle, branch, gather_images(ds, indices.subspan(begin, n)));
    out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(n)) = z;
  }
  return out;
}

double accuracy(const ModelBundle& bundle, const DGDataset& ds,
                std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("accuracy needs at least one example");
  const Matrix logits = apply_classifier(bundle.f_v, embed(bundle, Branch::kClass, ds, indices));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (argmax_row(logits, static_cast<Eigen::Index>(i)) == ds.examples[indices[i]].class_label) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

nlohmann::json to_json(const RunRecord& r) {
  return {{"variant", r.variant}, {"target", r.target},
          {"method", r.method},   {"seed", r.seed},
          {"accuracy", r.accuracy}, {"checkpoint_id", r.checkpoint_id},
          {"step", r.step},       {"config_hash", r.config_hash}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.variant = j.at("variant").get<std::string>();
  r.target = j.at("target").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.checkpoint_id = j.at("checkpoint_id").get<std::string>();
  r.step = j.at("step").get<int>();
  r.config_hash = j.at("config_hash").get<std::string>();
  return r;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.n = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::string format_mean_std(const MeanStd& value) {
  return fmt::format("{:.1f} ± {:.1f}", 100.0 * value.mean, 100.0 * value.std);
}

namespace {

std::vector<std::string> ordered_unique(std::span<const RunRecord> records,
                                        std::string RunRecord::*field) {
  std::vector<std::string> out;
  for (const RunRecord& r : records) {
    if (std::find(out.begin(), out.end(), r.*field) == out.end()) out.push_back(r.*field);
  }
  return out;
}

void log_line(const BenchmarkOptions& options, const std::string& line) {
  if (options.log) options.log(line);
}

}  // namespace

std::vector<SummaryCell> summarize(std::span<const RunRecord> records) {
  std::vector<SummaryCell> cells;
  for (const std::string& target : ordered_unique(records, &RunRecord::target)) {
    for (SelectionMethod m : kSelectionMethods) {
      std::vector<double> values;
      for (const RunRecord& r : records) {
        if (r.target == target && r.method == to_string(m)) values.push_back(r.accuracy);
      }
      if (!values.empty()) cells.push_back({target, to_string(m), mean_std(values)});
    }
  }
  return cells;
}

std::vector<SummaryCell> summarize_average(std::span<const RunRecord> records) {
  std::vector<SummaryCell> cells;
  const std::size_t num_targets = ordered_unique(records, &RunRecord::target).size();
  for (SelectionMethod m : kSelectionMethods) {
    std::map<std::uint64_t, std::pair<double, std::size_t>> per_seed;
    for (const RunRecord& r : records) {
      if (r.method != to_string(m)) continue;
      auto& [sum, count] = per_seed[r.seed];
      sum += r.accuracy;
      ++count;
    }
    std::vector<double> values;
    for (const auto& [seed, acc] : per_seed) {
      if (acc.second != num_targets) {
        throw ContractError(fmt::format("seed {} has {} of {} targets under {}", seed,
                                        acc.second, num_targets, to_string(m)));
      }
      values.push_back(acc.first / static_cast<double>(acc.second));
    }
    if (!values.empty()) cells.push_back({"Avg", to_string(m), mean_std(values)});
  }
  return cells;
}

BenchmarkResult run_benchmark(const TrainConfig& config, const DGDataset& ds,
                              std::span<const std::uint64_t> seeds,
                              const BenchmarkOptions& options) {
  if (seeds.empty()) throw ConfigError("run_benchmark needs at least one seed");
  if (options.workers < 1) throw ConfigError("workers must be >= 1");
  config.validate();
  ds.validate();

  BenchmarkResult result;
  result.variant = to_string(config.variant);
  result.targets = ds.domain_names;
  result.seeds.assign(seeds.begin(), seeds.end());

  struct Task {
    std::string target;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const std::string& target : ds.domain_names) {
    for (std::uint64_t seed : seeds) tasks.push_back({target, seed});
  }
  std::vector<std::vector<RunRecord>> slots(tasks.size());
  std::mutex log_mutex;

  auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    TrainConfig run = config;
    run.seed = task.seed;
    const SplitPlan plan = leave_one_out(ds, task.target, task.seed);
    TrainOptions train_options;
    std::filesystem::path run_dir;
    if (options.output_dir) {
      run_dir = *options.output_dir / result.variant / task.target /
                fmt::format("seed_{}", task.seed);
      train_options.checkpoint_dir = run_dir / "checkpoints";
    }
    const TrainResult trained = train(run, plan, ds, train_options);
    if (options.output_dir) write_history(trained.history, run_dir / "history.jsonl");
    for (SelectionMethod m : kSelectionMethods) {
      const EvalRecord& chosen = select_record(trained.history, m);
      RunRecord r;
      r.variant = result.variant;
      r.target = task.target;
      r.method = to_string(m);
      r.seed = task.seed;
      r.accuracy = chosen.target_accuracy;
      r.checkpoint_id = chosen.checkpoint_id;
      r.step = chosen.step;
      r.config_hash = trained.config_hash;
      slots[t].push_back(r);
    }
    std::lock_guard<std::mutex> lock(log_mutex);
    log_line(options, fmt::format("{} target={} seed={} TDVS={:.3f} Oracle={:.3f}",
                                  result.variant, task.target, task.seed,
                                  slots[t][0].accuracy, slots[t][1].accuracy));
  };

  if (options.workers == 1 || tasks.size() == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options.workers),
                                               tasks.size());
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
          try {
            run_task(t);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (auto& slot : slots) {
    for (RunRecord& r : slot) result.records.push_back(std::move(r));
  }
  result.summary = summarize(result.records);
  result.average = summarize_average(result.records);
  return result;
}

std::string render_benchmark_table(const BenchmarkResult& result) {
  std::string out = fmt::format("variant: {}  seeds: {}\n", result.variant, result.seeds.size());
  std::size_t width = 6;
  for (const std::string& t : result.targets) width = std::max(width, t.size());
  out += fmt::format("{:<{}}  {:>12}  {:>12}\n", "target", width, "TDVS", "Oracle");
  auto row = [&](const std::string& label, const std::vector<SummaryCell>& cells) {
    std::string tdvs = "-", oracle = "-";
    for (const SummaryCell& c : cells) {
      if (c.target != label) continue;
      (c.method == "TDVS" ? tdvs : oracle) = format_mean_std(c.accuracy);
    }
    out += fmt::format("{:<{}}  {:>12}  {:>12}\n", label, width, tdvs, oracle);
  };
  for (const std::string& t : result.targets) row(t, result.summary);
  row("Avg", result.average);
  return out;
}

AblationResult run_ablation(const TrainConfig& base, const DGDataset& ds,
                            std::span<const std::uint64_t> seeds,
                            const BenchmarkOptions& options) {
  AblationResult result;
  for (Variant v : kAblationVariants) {
    TrainConfig config = base;
    config.variant = v;
    config.loss.variant = v == Variant::kFullComb  ? ContrastiveVariant::kComb
                          : v == Variant::kFullInd ? ContrastiveVariant::kInd
                                                   : ContrastiveVariant::kNone;
    log_line(options, "ablation variant " + to_string(v));
    result.variants.push_back(run_benchmark(config, ds, seeds, options));
  }
  result.flags = trend_flags(result);
  return result;
}

const BenchmarkResult& find_variant(const AblationResult& result, Variant variant) {
  for (const BenchmarkResult& r : result.variants) {
    if (r.variant == to_string(variant)) return r;
  }
  throw RangeError("ablation result has no variant " + to_string(variant));
}

double average_accuracy(const BenchmarkResult& result, SelectionMethod method) {
  for (const SummaryCell& c : result.average) {
    if (c.method == to_string(method)) return c.accuracy.mean;
  }
  throw RangeError("no average for " + to_string(method));
}

std::vector<TrendFlag> trend_flags(const AblationResult& result) {
  std::vector<TrendFlag> flags;
  const double comb = average_accuracy(find_variant(result, Variant::kFullComb),
                                       SelectionMethod::kTdvs);
  for (Variant other : {Variant::kFullInd, Variant::kDisentangleOnly}) {
    TrendFlag f;
    f.lhs = to_string(Variant::kFullComb);
    f.rhs = to_string(other);
    f.name = f.lhs + " >= " + f.rhs;
    f.lhs_value = comb;
    f.rhs_value = average_accuracy(find_variant(result, other), SelectionMethod::kTdvs);
    f.holds = f.lhs_value >= f.rhs_value;
    flags.push_back(f);
  }
  return flags;
}

std::string describe(const TrendFlag& f) {
  return fmt::format("{}: {} ({:.4f} vs {:.4f}, gap {:+.4f}, TDVS)", f.name,
                     f.holds ? "holds" : "does not hold", f.lhs_value, f.rhs_value,
                     f.lhs_value - f.rhs_value);
}

std::string render_ablation_table(const AblationResult& result) {
  std::string out = fmt::format("{:<18}  {:>12}  {:>12}\n", "variant", "TDVS", "Oracle");
  for (const BenchmarkResult& r : result.variants) {
    std::string tdvs = "-", oracle = "-";
    for (const SummaryCell& c : r.average) {
      (c.method == "TDVS" ? tdvs : oracle) = format_mean_std(c.accuracy);
    }
    out += fmt::format("{:<18}  {:>12}  {:>12}\n", table_label(variant_from_string(r.variant)),
                       tdvs, oracle);
  }
  for (const TrendFlag& f : result.flags) out += describe(f) + "\n";
  return out;
}

}  // namespace cddg
