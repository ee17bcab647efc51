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
#ifndef CDDG_LOSSES_HPP_
#define CDDG_LOSSES_HPP_

#include <span>
#include <string>

#include "cddg/core.hpp"

namespace cddg {

// How the two feature types meet in the contrastive term.
//   kComb: one latent space, combined (K + M)-way label space.
//   kInd:  two latent spaces, the other feature type only as extra negatives.
//   kNone: no contrastive term.
enum class ContrastiveVariant { kComb, kInd, kNone };

std::string to_string(ContrastiveVariant variant);
ContrastiveVariant contrastive_variant_from_string(const std::string& name);

struct LossConfig {
  double temperature = 0.1;
  double alpha = 1.0;
  ContrastiveVariant variant = ContrastiveVariant::kComb;

  // Throws DomainError unless temperature > 0 and alpha >= 0.
  void validate() const;
};

// Gradient checks perturb rows off the unit sphere; they pass kSkip.
enum class NormCheck { kEnforce, kSkip };

// Supervised contrastive loss over the rows of z (B x D, unit rows).
//
// For every anchor i with a nonempty positive set P(i) (rows j != i with
// labels[j] == labels[i]) the anchor term is
//
//   -1/|P(i)| * sum_{p in P(i)} log( exp(z_i.z_p / t) / sum_{a != i} exp(z_i.z_a / t) )
//
// and the loss is the mean over contributing anchors. Anchors without
// positives are skipped; a batch with no contributing anchor scores 0.
// If grad is non-null it receives dLoss/dz.
double sup_contrastive(const Matrix& z, std::span<const int> labels,
                       double temperature, Matrix* grad = nullptr,
                       NormCheck check = NormCheck::kEnforce);

struct DualGradient {
  Matrix d_z_v;
  Matrix d_z_s;
};

// Supervised contrastive loss on [z_v; z_s] under the combined label space.
double dscl_comb(const DualEmbeddings& d, const LabelSpace& space,
                 double temperature, DualGradient* grad = nullptr,
                 NormCheck check = NormCheck::kEnforce);

// Sum of a domain term (anchors in z_s, same-domain positives, all of z_v as
// extra negatives) and a class term (anchors in z_v, same-class positives,
// all of z_s as extra negatives). Each term is averaged over its own
// contributing anchors.
double dscl_ind(const DualEmbeddings& d, double temperature,
                DualGradient* grad = nullptr,
                NormCheck check = NormCheck::kEnforce);

// Mean softmax cross-entropy. grad, if given, is dLoss/dlogits.
double cross_entropy(const Matrix& logits, std::span<const int> labels,
                     Matrix* grad = nullptr);

struct CeGradient {
  Matrix d_class_logits;
  Matrix d_domain_logits;
};

// Batch mean of CE(class_logits_i, y_i) + CE(domain_logits_i, y'_i).
double ce_dis(const Matrix& class_logits, const Matrix& domain_logits,
              std::span<const int> class_labels,
              std::span<const int> domain_labels, CeGradient* grad = nullptr);

inline double total_loss(double ce, double dscl, double alpha) {
  return ce + alpha * dscl;
}

// Applies the variant: kNone ignores dscl entirely.
double total_loss(double ce, double dscl, const LossConfig& config);

namespace detail {

// Rows with this label never act as anchors or positives; they only enlarge
// the denominators of the other anchors.
inline constexpr int kNegativeOnly = -1;

double masked_sup_contrastive(const Matrix& z, std::span<const int> labels,
                              double temperature, Matrix* grad);

}  // namespace detail

}  // namespace cddg

#endif  // CDDG_LOSSES_HPP_
