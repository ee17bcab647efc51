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

#include <random>

#include "cddg/losses.hpp"
#include "cddg/oracle.hpp"

namespace {

using namespace cddg;

Matrix unit_rows(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  m.rowwise().normalize();
  return m;
}

std::vector<int> labels(int n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int& v : y) v = pick(rng);
  return y;
}

DualEmbeddings dual(int n, int d) {
  DualEmbeddings e;
  e.z_v = unit_rows(n, d, 1);
  e.z_s = unit_rows(n, d, 2);
  e.class_labels = labels(n, 7, 3);
  e.domain_labels = labels(n, 4, 4);
  return e;
}

void BM_SupContrastive(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix z = unit_rows(n, 128, 0);
  const std::vector<int> y = labels(n, 7, 1);
  Matrix grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sup_contrastive(z, y, 0.1, &grad));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SupContrastive)->Arg(64)->Arg(128)->Arg(256);

void BM_SupContrastiveOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix z = unit_rows(n, 128, 0);
  const std::vector<int> y = labels(n, 7, 1);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::oracle_scl(z, y, 0.1));
}
BENCHMARK(BM_SupContrastiveOracle)->Arg(64)->Arg(128);

void BM_DsclComb(benchmark::State& state) {
  const DualEmbeddings e = dual(static_cast<int>(state.range(0)), 128);
  const LabelSpace space(7, 4);
  DualGradient grad;
  for (auto _ : state) benchmark::DoNotOptimize(dscl_comb(e, space, 0.1, &grad));
}
BENCHMARK(BM_DsclComb)->Arg(64)->Arg(128);

void BM_DsclInd(benchmark::State& state) {
  const DualEmbeddings e = dual(static_cast<int>(state.range(0)), 128);
  DualGradient grad;
  for (auto _ : state) benchmark::DoNotOptimize(dscl_ind(e, 0.1, &grad));
}
BENCHMARK(BM_DsclInd)->Arg(64)->Arg(128);

}  // namespace
