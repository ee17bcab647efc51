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
#include "cddg/oracle.hpp"

#include <cmath>
#include <vector>

#include "cddg/errors.hpp"

namespace cddg::oracle {

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const Matrix& z) {
  Rows rows(z.rows(), std::vector<double>(z.cols()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index k = 0; k < z.cols(); ++k) rows[i][k] = z(i, k);
  }
  return rows;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// One anchor's term: -1/|P| sum_p log(exp(a.p/t) / sum_{n in denom} exp(a.n/t)).
double anchor_term(const std::vector<double>& anchor,
                   const std::vector<const std::vector<double>*>& positives,
                   const std::vector<const std::vector<double>*>& denominator,
                   double t) {
  double denom = 0.0;
  for (const auto* other : denominator) denom += std::exp(dot(anchor, *other) / t);
  double acc = 0.0;
  for (const auto* p : positives) {
    acc += std::log(std::exp(dot(anchor, *p) / t) / denom);
  }
  return -acc / static_cast<double>(positives.size());
}

}  // namespace

double oracle_scl(const Matrix& z, std::span<const int> labels,
                  double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be > 0");
  const Rows rows = to_rows(z);
  const std::size_t b = rows.size();
  double total = 0.0;
  int anchors = 0;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<const std::vector<double>*> positives, denominator;
    for (std::size_t a = 0; a < b; ++a) {
      if (a == i) continue;
      denominator.push_back(&rows[a]);
      if (labels[a] == labels[i]) positives.push_back(&rows[a]);
    }
    if (positives.empty()) continue;
    total += anchor_term(rows[i], positives, denominator, temperature);
    ++anchors;
  }
  return anchors == 0 ? 0.0 : total / anchors;
}

double oracle_dscl_comb(const DualEmbeddings& d, int num_classes,
                        double temperature) {
  const Rows v = to_rows(d.z_v);
  const Rows s = to_rows(d.z_s);
  Rows all;
  std::vector<int> labels;
  for (std::size_t i = 0; i < v.size(); ++i) {
    all.push_back(v[i]);
    labels.push_back(d.class_labels[i]);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    all.push_back(s[i]);
    labels.push_back(num_classes + d.domain_labels[i]);
  }
  double total = 0.0;
  int anchors = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::vector<const std::vector<double>*> positives, denominator;
    for (std::size_t a = 0; a < all.size(); ++a) {
      if (a == i) continue;
      denominator.push_back(&all[a]);
      if (labels[a] == labels[i]) positives.push_back(&all[a]);
    }
    if (positives.empty()) continue;
    total += anchor_term(all[i], positives, denominator, temperature);
    ++anchors;
  }
  return anchors == 0 ? 0.0 : total / anchors;
}

double oracle_dscl_ind(const DualEmbeddings& d, double temperature) {
  const Rows v = to_rows(d.z_v);
  const Rows s = to_rows(d.z_s);

  // Domain part: anchors s in S, positives same-domain in S \ {s},
  // denominator over (S \ {s}) u V.
  double domain_total = 0.0;
  int domain_anchors = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<const std::vector<double>*> positives, denominator;
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (a == i) continue;
      denominator.push_back(&s[a]);
      if (d.domain_labels[a] == d.domain_labels[i]) positives.push_back(&s[a]);
    }
    for (const auto& row : v) denominator.push_back(&row);
    if (positives.empty()) continue;
    domain_total += anchor_term(s[i], positives, denominator, temperature);
    ++domain_anchors;
  }

  // Class part: anchors v in V, positives same-class in V \ {v},
  // denominator over (V \ {v}) u S.
  double class_total = 0.0;
  int class_anchors = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::vector<const std::vector<double>*> positives, denominator;
    for (std::size_t a = 0; a < v.size(); ++a) {
      if (a == i) continue;
      denominator.push_back(&v[a]);
      if (d.class_labels[a] == d.class_labels[i]) positives.push_back(&v[a]);
    }
    for (const auto& row : s) denominator.push_back(&row);
    if (positives.empty()) continue;
    class_total += anchor_term(v[i], positives, denominator, temperature);
    ++class_anchors;
  }

  const double domain_term =
      domain_anchors == 0 ? 0.0 : domain_total / domain_anchors;
  const double class_term =
      class_anchors == 0 ? 0.0 : class_total / class_anchors;
  return domain_term + class_term;
}

}  // namespace cddg::oracle
