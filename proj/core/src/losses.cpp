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
#include "cddg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "cddg/errors.hpp"

namespace cddg {

std::string to_string(ContrastiveVariant variant) {
  switch (variant) {
    case ContrastiveVariant::kComb: return "comb";
    case ContrastiveVariant::kInd: return "ind";
    case ContrastiveVariant::kNone: return "none";
  }
  return "none";
}

ContrastiveVariant contrastive_variant_from_string(const std::string& name) {
  if (name == "comb") return ContrastiveVariant::kComb;
  if (name == "ind") return ContrastiveVariant::kInd;
  if (name == "none") return ContrastiveVariant::kNone;
  throw ConfigError("unknown contrastive variant '" + name + "'");
}

void LossConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError(fmt::format("temperature must be > 0, got {}", temperature));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError(fmt::format("alpha must be >= 0, got {}", alpha));
  }
}

namespace {

void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError(fmt::format("temperature must be > 0, got {}", temperature));
  }
}

void check_rows(const Matrix& z, std::span<const int> labels, NormCheck check) {
  if (z.rows() < 2) {
    throw ShapeError(fmt::format("contrastive loss needs >= 2 rows, got {}", z.rows()));
  }
  if (labels.size() != static_cast<std::size_t>(z.rows())) {
    throw ShapeError(fmt::format("{} labels for {} rows", labels.size(), z.rows()));
  }
  if (check == NormCheck::kEnforce) {
    const double dev = max_unit_norm_deviation(z);
    if (dev > kUnitNormTolerance) {
      throw ContractError(fmt::format(
          "contrastive input rows must be unit norm (deviation {:.3g})", dev));
    }
  }
}

void check_dual(const DualEmbeddings& d) {
  if (d.z_v.rows() != d.z_s.rows() || d.z_v.cols() != d.z_s.cols()) {
    throw ShapeError(fmt::format("z_v is {}x{} but z_s is {}x{}", d.z_v.rows(),
                                 d.z_v.cols(), d.z_s.rows(), d.z_s.cols()));
  }
  if (d.class_labels.size() != static_cast<std::size_t>(d.z_v.rows()) ||
      d.domain_labels.size() != static_cast<std::size_t>(d.z_v.rows())) {
    throw ShapeError("embedding label vectors do not match row count");
  }
}

void split_gradient(const Matrix& stacked, Eigen::Index n, DualGradient* grad) {
  grad->d_z_v = stacked.topRows(n);
  grad->d_z_s = stacked.bottomRows(n);
}

}  // namespace

namespace detail {

double masked_sup_contrastive(const Matrix& z, std::span<const int> labels,
                              double temperature, Matrix* grad) {
  const Eigen::Index b = z.rows();
  const Matrix logits = (z * z.transpose()) / temperature;

  // coeff(i, j) = dLoss/dlogits(i, j) before the 1/anchors scaling.
  Matrix coeff;
  if (grad != nullptr) coeff = Matrix::Zero(b, b);

  double total = 0.0;
  int anchors = 0;
  std::vector<double> weights(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    if (labels[i] == kNegativeOnly) continue;
    int positives = 0;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j != i && labels[j] == labels[i]) ++positives;
    }
    if (positives == 0) continue;

    double row_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j != i) row_max = std::max(row_max, logits(i, j));
    }
    double denom = 0.0;
    double positive_sum = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j == i) continue;
      weights[j] = std::exp(logits(i, j) - row_max);
      denom += weights[j];
      if (labels[j] == labels[i]) positive_sum += logits(i, j);
    }
    const double log_denom = row_max + std::log(denom);
    total += log_denom - positive_sum / positives;
    ++anchors;

    if (grad != nullptr) {
      for (Eigen::Index j = 0; j < b; ++j) {
        if (j == i) continue;
        coeff(i, j) = weights[j] / denom -
                      (labels[j] == labels[i] ? 1.0 / positives : 0.0);
      }
    }
  }

  if (anchors == 0) {
    if (grad != nullptr) *grad = Matrix::Zero(b, z.cols());
    return 0.0;
  }
  if (grad != nullptr) {
    *grad = ((coeff + coeff.transpose()) * z) / (temperature * anchors);
  }
  // Each anchor term is >= 0 analytically; clamp rounding noise.
  return std::max(0.0, total / anchors);
}

}  // namespace detail

double sup_contrastive(const Matrix& z, std::span<const int> labels,
                       double temperature, Matrix* grad, NormCheck check) {
  check_temperature(temperature);
  check_rows(z, labels, check);
  for (int y : labels) {
    if (y < 0) throw RangeError(fmt::format("negative label {}", y));
  }
  return detail::masked_sup_contrastive(z, labels, temperature, grad);
}

double dscl_comb(const DualEmbeddings& d, const LabelSpace& space,
                 double temperature, DualGradient* grad, NormCheck check) {
  check_dual(d);
  const MixedEmbeddings mixed = concat_mixed(d, space);
  Matrix stacked_grad;
  const double value = sup_contrastive(mixed.z, mixed.labels, temperature,
                                       grad ? &stacked_grad : nullptr, check);
  if (grad != nullptr) split_gradient(stacked_grad, d.rows(), grad);
  return value;
}

double dscl_ind(const DualEmbeddings& d, double temperature, DualGradient* grad,
                NormCheck check) {
  check_temperature(temperature);
  check_dual(d);
  const Eigen::Index n = d.rows();
  Matrix stacked(2 * n, d.z_v.cols());
  stacked.topRows(n) = d.z_v;
  stacked.bottomRows(n) = d.z_s;

  Labels domain_part(2 * n, detail::kNegativeOnly);
  Labels class_part(2 * n, detail::kNegativeOnly);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.class_labels[i] < 0 || d.domain_labels[i] < 0) {
      throw RangeError("negative label in dual embeddings");
    }
    class_part[i] = d.class_labels[i];
    domain_part[n + i] = d.domain_labels[i];
  }
  check_rows(stacked, class_part, check);

  Matrix g_domain, g_class;
  const double domain_term = detail::masked_sup_contrastive(
      stacked, domain_part, temperature, grad ? &g_domain : nullptr);
  const double class_term = detail::masked_sup_contrastive(
      stacked, class_part, temperature, grad ? &g_class : nullptr);
  if (grad != nullptr) split_gradient(g_domain + g_class, n, grad);
  return domain_term + class_term;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels,
                     Matrix* grad) {
  const Eigen::Index b = logits.rows();
  const Eigen::Index k = logits.cols();
  if (b == 0 || labels.size() != static_cast<std::size_t>(b)) {
    throw ShapeError(fmt::format("{} labels for {} logit rows", labels.size(), b));
  }
  if (grad != nullptr) grad->resize(b, k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k) {
      throw RangeError(fmt::format("label {} outside [0, {})", y, k));
    }
    const double row_max = logits.row(i).maxCoeff();
    const auto shifted = (logits.row(i).array() - row_max).exp();
    const double denom = shifted.sum();
    total += row_max + std::log(denom) - logits(i, y);
    if (grad != nullptr) {
      grad->row(i) = shifted / (denom * b);
      (*grad)(i, y) -= 1.0 / b;
    }
  }
  return total / b;
}

double ce_dis(const Matrix& class_logits, const Matrix& domain_logits,
              std::span<const int> class_labels,
              std::span<const int> domain_labels, CeGradient* grad) {
  if (class_logits.rows() != domain_logits.rows()) {
    throw ShapeError(fmt::format("class logits have {} rows, domain logits {}",
                                 class_logits.rows(), domain_logits.rows()));
  }
  const double class_term = cross_entropy(
      class_logits, class_labels, grad ? &grad->d_class_logits : nullptr);
  const double domain_term = cross_entropy(
      domain_logits, domain_labels, grad ? &grad->d_domain_logits : nullptr);
  return class_term + domain_term;
}

double total_loss(double ce, double dscl, const LossConfig& config) {
  if (config.variant == ContrastiveVariant::kNone) return ce;
  return total_loss(ce, dscl, config.alpha);
}

}  // namespace cddg
