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
#include "cddg/core.hpp"

#include <cmath>
#include <fmt/format.h>

#include "cddg/errors.hpp"

namespace cddg {

std::string to_string(const ImageShape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width) +
         "x" + std::to_string(shape.channels);
}

LabelSpace::LabelSpace(int num_classes, int num_domains)
    : num_classes_(num_classes), num_domains_(num_domains) {
  if (num_classes < 1 || num_domains < 1) {
    throw RangeError("label space needs at least one class and one domain");
  }
}

int LabelSpace::combined_label(LabelKind kind, int raw) const {
  const int limit = kind == LabelKind::kClass ? num_classes_ : num_domains_;
  if (raw < 0 || raw >= limit) {
    throw RangeError((kind == LabelKind::kClass ? "class" : "domain") +
                     std::string(" label ") + std::to_string(raw) +
                     " outside [0, " + std::to_string(limit) + ")");
  }
  return kind == LabelKind::kClass ? raw : num_classes_ + raw;
}

std::pair<LabelKind, int> LabelSpace::decode(int combined) const {
  if (combined < 0 || combined >= combined_size()) {
    throw RangeError("combined label " + std::to_string(combined) +
                     " outside [0, " + std::to_string(combined_size()) + ")");
  }
  if (combined < num_classes_) return {LabelKind::kClass, combined};
  return {LabelKind::kDomain, combined - num_classes_};
}

void AugmentedBatch::validate() const {
  const int n = images.count;
  if (n % 2 != 0 || n == 0) {
    throw ShapeError("augmented batch must hold 2N rows, got " +
                     std::to_string(n));
  }
  if (class_labels.size() != static_cast<std::size_t>(n) ||
      domain_labels.size() != static_cast<std::size_t>(n) ||
      images.pixels.size() != n * images.shape.size()) {
    throw ShapeError("augmented batch label/image lengths disagree");
  }
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    if (class_labels[i] != class_labels[i + half] ||
        domain_labels[i] != domain_labels[i + half]) {
      throw ContractError("views " + std::to_string(i) + " and " +
                          std::to_string(i + half) + " carry different labels");
    }
  }
}

double max_unit_norm_deviation(const Matrix& z) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    worst = std::max(worst, std::abs(z.row(i).norm() - 1.0));
  }
  return worst;
}

Matrix normalize_rows(const Matrix& z) {
  Matrix out = z;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

void DualEmbeddings::validate(double tolerance) const {
  if (z_v.rows() != z_s.rows() || z_v.cols() != z_s.cols()) {
    throw ShapeError(fmt::format("z_v is {}x{} but z_s is {}x{}", z_v.rows(),
                                 z_v.cols(), z_s.rows(), z_s.cols()));
  }
  if (class_labels.size() != static_cast<std::size_t>(z_v.rows()) ||
      domain_labels.size() != static_cast<std::size_t>(z_v.rows())) {
    throw ShapeError("embedding label vectors do not match row count");
  }
  const double dev =
      std::max(max_unit_norm_deviation(z_v), max_unit_norm_deviation(z_s));
  if (dev > tolerance) {
    throw ContractError(
        fmt::format("embedding rows are not unit norm (deviation {:.3g})", dev));
  }
}

MixedEmbeddings concat_mixed(const DualEmbeddings& d, const LabelSpace& space) {
  if (d.z_v.cols() != d.z_s.cols() || d.z_v.rows() != d.z_s.rows()) {
    throw ShapeError(fmt::format("cannot stack z_v {}x{} with z_s {}x{}",
                                 d.z_v.rows(), d.z_v.cols(), d.z_s.rows(),
                                 d.z_s.cols()));
  }
  if (d.class_labels.size() != static_cast<std::size_t>(d.z_v.rows()) ||
      d.domain_labels.size() != static_cast<std::size_t>(d.z_s.rows())) {
    throw ShapeError("embedding label vectors do not match row count");
  }
  const Eigen::Index n = d.z_v.rows();
  MixedEmbeddings out;
  out.z.resize(2 * n, d.z_v.cols());
  out.z.topRows(n) = d.z_v;
  out.z.bottomRows(n) = d.z_s;
  out.labels.reserve(2 * n);
  for (int y : d.class_labels) {
    out.labels.push_back(space.combined_label(LabelKind::kClass, y));
  }
  for (int y : d.domain_labels) {
    out.labels.push_back(space.combined_label(LabelKind::kDomain, y));
  }
  return out;
}

}  // namespace cddg
