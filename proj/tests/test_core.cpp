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

#include <set>

#include "cddg/core.hpp"
#include "cddg/errors.hpp"
#include "test_util.hpp"

namespace cddg {
namespace {

TEST(LabelSpace, CombinedLabelOffsetsDomains) {
  const LabelSpace space(7, 4);
  EXPECT_EQ(space.combined_label(LabelKind::kClass, 3), 3);
  EXPECT_EQ(space.combined_label(LabelKind::kDomain, 0), 7);
  EXPECT_EQ(space.combined_size(), 11);
}

TEST(LabelSpace, CombinedSpaceIsDisjointAndDecodes) {
  const LabelSpace space(7, 4);
  std::set<int> seen;
  for (int c = 0; c < 7; ++c) seen.insert(space.combined_label(LabelKind::kClass, c));
  for (int d = 0; d < 4; ++d) seen.insert(space.combined_label(LabelKind::kDomain, d));
  EXPECT_EQ(seen.size(), 11u);
  for (int v : seen) {
    const auto [kind, raw] = space.decode(v);
    EXPECT_EQ(space.combined_label(kind, raw), v);
  }
}

TEST(LabelSpace, OutOfRangeRawLabelsAreRejected) {
  const LabelSpace space(7, 4);
  EXPECT_THROW(space.combined_label(LabelKind::kClass, 7), RangeError);
  EXPECT_THROW(space.combined_label(LabelKind::kDomain, 4), RangeError);
  EXPECT_THROW(space.combined_label(LabelKind::kClass, -1), RangeError);
  EXPECT_THROW(space.decode(11), RangeError);
  EXPECT_THROW(LabelSpace(0, 3), RangeError);
}

TEST(ConcatMixed, StacksClassThenDomainRows) {
  DualEmbeddings d;
  d.z_v = Matrix(2, 2);
  d.z_v << 1, 0, 0, 1;
  d.z_s = Matrix(2, 2);
  d.z_s << 0, 1, 1, 0;
  d.class_labels = {2, 2};
  d.domain_labels = {1, 1};
  const MixedEmbeddings m = concat_mixed(d, LabelSpace(5, 2));
  EXPECT_EQ(m.z.rows(), 4);
  EXPECT_EQ(m.z.cols(), 2);
  EXPECT_EQ(m.labels, (Labels{2, 2, 6, 6}));
  EXPECT_TRUE(m.z.topRows(2).isApprox(d.z_v));
  EXPECT_TRUE(m.z.bottomRows(2).isApprox(d.z_s));
}

TEST(ConcatMixed, DimensionMismatchIsAShapeError) {
  std::mt19937_64 rng(1);
  DualEmbeddings d = testing::random_dual(rng, 3, 4, 2, 2);
  d.z_s = testing::random_unit_rows(rng, 3, 5);
  EXPECT_THROW(concat_mixed(d, LabelSpace(2, 2)), ShapeError);
}

TEST(ConcatMixed, PermutingInputsPermutesOutputs) {
  std::mt19937_64 rng(2);
  const DualEmbeddings d = testing::random_dual(rng, 4, 3, 3, 2);
  DualEmbeddings p = d;
  const int perm[] = {2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) {
    p.z_v.row(i) = d.z_v.row(perm[i]);
    p.z_s.row(i) = d.z_s.row(perm[i]);
    p.class_labels[i] = d.class_labels[perm[i]];
    p.domain_labels[i] = d.domain_labels[perm[i]];
  }
  const LabelSpace space(3, 2);
  const MixedEmbeddings a = concat_mixed(d, space);
  const MixedEmbeddings b = concat_mixed(p, space);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(b.labels[i], a.labels[perm[i]]);
    EXPECT_EQ(b.labels[4 + i], a.labels[4 + perm[i]]);
    EXPECT_TRUE(b.z.row(4 + i).isApprox(a.z.row(4 + perm[i])));
  }
}

TEST(DualEmbeddings, ValidateRejectsNonUnitRows) {
  std::mt19937_64 rng(3);
  DualEmbeddings d = testing::random_dual(rng, 4, 3, 2, 2);
  EXPECT_NO_THROW(d.validate());
  d.z_v(0, 0) += 0.01;
  EXPECT_THROW(d.validate(), ContractError);
}

TEST(AugmentedBatch, ValidateChecksPairing) {
  AugmentedBatch b;
  b.images = ImageBatch(4, {2, 2, 1});
  b.class_labels = {0, 1, 0, 1};
  b.domain_labels = {1, 1, 1, 1};
  b.source_index = {0, 1, 0, 1};
  EXPECT_NO_THROW(b.validate());
  b.class_labels[2] = 1;
  EXPECT_THROW(b.validate(), ContractError);
  b.images = ImageBatch(3, {2, 2, 1});
  EXPECT_THROW(b.validate(), ShapeError);
}

TEST(NormalizeRows, IsIdempotent) {
  std::mt19937_64 rng(4);
  const Matrix z = testing::random_unit_rows(rng, 6, 5);
  EXPECT_LT((normalize_rows(z) - z).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(max_unit_norm_deviation(z), 1e-12);
}

}  // namespace
}  // namespace cddg
