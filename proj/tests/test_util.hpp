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
#ifndef CDDG_TESTS_TEST_UTIL_HPP_
#define CDDG_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "cddg/core.hpp"
#include "cddg/dataset.hpp"
#include "cddg/networks.hpp"
#include "cddg/training.hpp"

namespace cddg::testing {

inline Matrix random_unit_rows(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = normal(rng);
  }
  return normalize_rows(z);
}

inline Labels random_labels(std::mt19937_64& rng, int n, int num_labels) {
  Labels out(static_cast<std::size_t>(n));
  std::uniform_int_distribution<int> pick(0, num_labels - 1);
  for (int& l : out) l = pick(rng);
  return out;
}

inline DualEmbeddings random_dual(std::mt19937_64& rng, int n, int d, int k, int m) {
  DualEmbeddings out;
  out.z_v = random_unit_rows(rng, n, d);
  out.z_s = random_unit_rows(rng, n, d);
  out.class_labels = random_labels(rng, n, k);
  out.domain_labels = random_labels(rng, n, m);
  return out;
}

inline SyntheticSpec tiny_synthetic(int n_per_cell = 10) {
  SyntheticSpec s;
  s.num_classes = 3;
  s.num_domains = 3;
  s.n_per_cell = n_per_cell;
  s.image_size = 8;
  return s;
}

inline EncoderSpec tiny_cnn(const ImageShape& input) {
  EncoderSpec spec;
  spec.input = input;
  spec.embedding_dim = 8;
  spec.widths = {4, 8};
  return spec;
}

inline TrainConfig tiny_train_config(const DGDataset& ds, int steps = 20, int eval_every = 10) {
  TrainConfig c;
  c.encoder = tiny_cnn(ds.image_shape);
  c.batch_size = 8;
  c.steps = steps;
  c.eval_every = eval_every;
  return c;
}

// A fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cddg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cddg::testing

#endif  // CDDG_TESTS_TEST_UTIL_HPP_
