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
#include "cddg/probe.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cddg/errors.hpp"
#include "cddg/evaluation.hpp"

namespace cddg {

void ProbeConfig::validate() const {
  if (iterations < 1) throw ConfigError("probe.iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("probe.learning_rate must be > 0");
  if (!(l2 >= 0.0)) throw ConfigError("probe.l2 must be >= 0");
}

namespace {

Matrix standardize(const LinearProbe& probe, const Matrix& x) {
  return (x.rowwise() - probe.mean).array().rowwise() / probe.scale.array();
}

}  // namespace

LinearProbe fit_linear_probe(const Matrix& x, std::span<const int> y, const ProbeConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ShapeError(fmt::format("probe features have {} rows but {} labels", x.rows(), y.size()));
  }
  LinearProbe probe;
  probe.label_set.assign(y.begin(), y.end());
  std::sort(probe.label_set.begin(), probe.label_set.end());
  probe.label_set.erase(std::unique(probe.label_set.begin(), probe.label_set.end()),
                        probe.label_set.end());
  if (probe.label_set.size() < 2) {
    throw ContractError(fmt::format("linear probe needs at least two distinct labels, got {}",
                                    probe.label_set.size()));
  }

  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const auto l = static_cast<Eigen::Index>(probe.label_set.size());
  probe.mean = x.colwise().mean();
  probe.scale = ((x.rowwise() - probe.mean).array().square().colwise().sum() /
                 static_cast<double>(n))
                    .sqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(probe.scale(j) > 1e-12)) probe.scale(j) = 1.0;
  }
  const Matrix xs = standardize(probe, x);

  Matrix target = Matrix::Zero(n, l);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto it = std::lower_bound(probe.label_set.begin(), probe.label_set.end(),
                                     y[static_cast<std::size_t>(i)]);
    target(i, it - probe.label_set.begin()) = 1.0;
  }

  probe.weight = Matrix::Zero(d, l);
  probe.bias = Eigen::RowVectorXd::Zero(l);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < config.iterations; ++it) {
    Matrix p = (xs * probe.weight).rowwise() + probe.bias;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = p.row(i).maxCoeff();
      p.row(i) = (p.row(i).array() - m).exp();
      p.row(i) /= p.row(i).sum();
    }
    const Matrix err = (p - target) * inv_n;
    probe.weight -= config.learning_rate * (xs.transpose() * err + config.l2 * probe.weight);
    probe.bias -= config.learning_rate * err.colwise().sum();
  }
  return probe;
}

std::vector<int> predict(const LinearProbe& probe, const Matrix& x) {
  if (x.cols() != probe.weight.rows()) {
    throw ShapeError(fmt::format("probe expects {} features, got {}", probe.weight.rows(),
                                 x.cols()));
  }
  const Matrix logits = (standardize(probe, x) * probe.weight).rowwise() + probe.bias;
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = probe.label_set[static_cast<std::size_t>(argmax_row(logits, i))];
  }
  return out;
}

double probe_accuracy(const LinearProbe& probe, const Matrix& x, std::span<const int> y) {
  if (y.empty()) throw ContractError("probe accuracy needs at least one example");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ShapeError(fmt::format("probe features have {} rows but {} labels", x.rows(), y.size()));
  }
  const std::vector<int> pred = predict(probe, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == y[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

std::string describe(const ProbeReport& r) {
  return fmt::format("{} {:<6} probe: accuracy {:.3f} (chance {:.3f}, fit on {}, tested on {})",
                     to_string(r.branch), r.target == LabelKind::kClass ? "class" : "domain",
                     r.accuracy, r.chance, r.num_train, r.num_test);
}

namespace {

std::vector<int> labels_of(const DGDataset& ds, const std::vector<std::size_t>& idx,
                           LabelKind kind) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const LabeledExample& e = ds.examples[i];
    out.push_back(kind == LabelKind::kClass ? e.class_label : e.domain_label);
  }
  return out;
}

}  // namespace

std::vector<ProbeReport> probe_disentanglement(const ModelBundle& bundle, const SplitPlan& plan,
                                               const DGDataset& ds, const ProbeConfig& config) {
  config.validate();
  const SplitIndices split = resolve(plan, ds);
  std::vector<ProbeReport> reports;
  for (Branch branch : {Branch::kClass, Branch::kDomain}) {
    const Matrix train = embed(bundle, branch, ds, split.source_train);
    const Matrix val = embed(bundle, branch, ds, split.source_val);
    const Matrix target = embed(bundle, branch, ds, split.target_all);
    for (LabelKind kind : {LabelKind::kClass, LabelKind::kDomain}) {
      const bool is_class = kind == LabelKind::kClass;
      const Matrix& fit_x = is_class ? val : train;
      const Matrix& test_x = is_class ? target : val;
      const auto& fit_idx = is_class ? split.source_val : split.source_train;
      const auto& test_idx = is_class ? split.target_all : split.source_val;
      const std::vector<int> fit_y = labels_of(ds, fit_idx, kind);
      const LinearProbe probe = fit_linear_probe(fit_x, fit_y, config);
      ProbeReport r;
      r.branch = branch;
      r.target = kind;
      r.accuracy = probe_accuracy(probe, test_x, labels_of(ds, test_idx, kind));
      r.chance = 1.0 / static_cast<double>(probe.label_set.size());
      r.num_train = static_cast<int>(fit_idx.size());
      r.num_test = static_cast<int>(test_idx.size());
      reports.push_back(r);
    }
  }
  return reports;
}

}  // namespace cddg
