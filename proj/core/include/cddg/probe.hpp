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
#ifndef CDDG_PROBE_HPP_
#define CDDG_PROBE_HPP_

#include <span>
#include <string>
#include <vector>

#include "cddg/core.hpp"
#include "cddg/dataset.hpp"
#include "cddg/networks.hpp"

namespace cddg {

struct ProbeConfig {
  int iterations = 500;
  double learning_rate = 0.5;
  double l2 = 1e-4;

  void validate() const;
};

// Multinomial logistic regression on fixed features, standardized with the
// training-set mean and scale.
struct LinearProbe {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  Matrix weight;  // [D, L]
  Eigen::RowVectorXd bias;
  std::vector<int> label_set;  // column -> original label
};

// Throws ContractError if y holds fewer than two distinct labels.
LinearProbe fit_linear_probe(const Matrix& x, std::span<const int> y,
                             const ProbeConfig& config);
std::vector<int> predict(const LinearProbe& probe, const Matrix& x);
double probe_accuracy(const LinearProbe& probe, const Matrix& x,
                      std::span<const int> y);

struct ProbeReport {
  Branch branch = Branch::kClass;
  LabelKind target = LabelKind::kClass;
  double accuracy = 0.0;
  double chance = 0.0;  // 1 / number of labels the probe was fit on
  int num_train = 0;
  int num_test = 0;
};

std::string describe(const ProbeReport& report);

// Freezes both encoders and fits a linear probe for every (branch, target)
// pair. Class probes fit on source-val and test on the target domain. The
// target domain's label never occurs in the sources, so domain probes fit on
// source-train and test on source-val.
std::vector<ProbeReport> probe_disentanglement(const ModelBundle& bundle,
                                               const SplitPlan& plan,
                                               const DGDataset& ds,
                                               const ProbeConfig& config = {});

}  // namespace cddg

#endif  // CDDG_PROBE_HPP_
