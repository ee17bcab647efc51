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
#ifndef CDDG_VERIFY_HPP_
#define CDDG_VERIFY_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cddg/core.hpp"
#include "cddg/losses.hpp"

namespace cddg::verify {

using SclKernel = std::function<double(const Matrix&, std::span<const int>, double,
                                       Matrix*, NormCheck)>;

// The SCL implementation under test. Everything else is checked against the
// library functions directly.
struct Kernels {
  SclKernel scl = [](const Matrix& z, std::span<const int> labels, double t, Matrix* grad,
                     NormCheck check) { return sup_contrastive(z, labels, t, grad, check); };
};

struct Check {
  int group = 0;  // 1 oracle, 2 closed forms, 3 gradients, 4 structure
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct Report {
  std::vector<Check> checks;
  std::vector<double> seconds;  // wall time per group, index group - 1

  bool passed() const;
  bool group_passed(int group) const;
};

struct Options {
  int oracle_batches = 100;
  int gradient_instances = 20;
  double fd_step = 1e-5;
  std::uint64_t seed = 0;
};

std::vector<Check> oracle_suite(const Kernels& kernels, const Options& options);
std::vector<Check> closed_form_suite(const Kernels& kernels);
std::vector<Check> gradient_suite(const Kernels& kernels, const Options& options);
std::vector<Check> structural_suite(const Kernels& kernels, const Options& options);

Report run_all(const Kernels& kernels = {}, const Options& options = {});

std::string describe(const Check& check);

// Largest |a - n| divided by the largest magnitude in either matrix.
double max_relative_error(const Matrix& analytic, const Matrix& numeric);

// Central differences of f at z, one coordinate at a time.
Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& z,
                         double step);

namespace fixtures {

// Scores the denominator with the wrong sign while reporting the true
// gradient; every oracle and gradient comparison should reject it.
Kernels mutant_scl_denominator_sign();

}  // namespace fixtures

}  // namespace cddg::verify

#endif  // CDDG_VERIFY_HPP_
