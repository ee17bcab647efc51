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
#include "cddg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "cddg/networks.hpp"
#include "cddg/oracle.hpp"
#include "cddg/training.hpp"

namespace cddg::verify {

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool Report::group_passed(int group) const {
  bool any = false;
  for (const Check& c : checks) {
    if (c.group != group) continue;
    any = true;
    if (!c.passed) return false;
  }
  return any;
}

std::string describe(const Check& c) {
  std::string out = fmt::format("[{}] {} {}: measured {:.3e}, tolerance {:.1e}",
                                c.passed ? "PASS" : "FAIL", c.group, c.name, c.measured,
                                c.tolerance);
  if (!c.detail.empty()) out += " (" + c.detail + ")";
  return out;
}

double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max(analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff());
  const double diff = (analytic - numeric).cwiseAbs().maxCoeff();
  if (scale == 0.0) return diff;
  return diff / scale;
}

Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& z,
                         double step) {
  Matrix grad(z.rows(), z.cols());
  Matrix probe = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double keep = probe(i, j);
      probe(i, j) = keep + step;
      const double up = f(probe);
      probe(i, j) = keep - step;
      const double down = f(probe);
      probe(i, j) = keep;
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

namespace {

using Clock = std::chrono::steady_clock;

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Matrix random_unit_rows(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = normal(rng);
  }
  return normalize_rows(z);
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
  return m;
}

Labels random_labels(std::mt19937_64& rng, int n, int num_labels) {
  Labels labels(static_cast<std::size_t>(n));
  for (int& l : labels) l = uniform_int(rng, 0, num_labels - 1);
  return labels;
}

DualEmbeddings random_dual(std::mt19937_64& rng, int n, int d, int k, int m) {
  DualEmbeddings out;
  out.z_v = random_unit_rows(rng, n, d);
  out.z_s = random_unit_rows(rng, n, d);
  out.class_labels = random_labels(rng, n, k);
  out.domain_labels = random_labels(rng, n, m);
  return out;
}

Check make_check(int group, std::string name, double measured, double tolerance,
                 std::string detail = {}) {
  return {group, std::move(name), measured <= tolerance, measured, tolerance, std::move(detail)};
}

double mean_log_denominator(std::span<const int> labels, std::size_t denominator) {
  // Contributing anchors each tend to log(denominator) as t grows.
  bool any = false;
  for (std::size_t i = 0; i < labels.size() && !any; ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (i != j && labels[i] == labels[j]) any = true;
    }
  }
  return any ? std::log(static_cast<double>(denominator)) : 0.0;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

DualEmbeddings split_dual(const Matrix& stacked, const DualEmbeddings& like) {
  DualEmbeddings d = like;
  d.z_v = stacked.topRows(like.z_v.rows());
  d.z_s = stacked.bottomRows(like.z_s.rows());
  return d;
}

}  // namespace

std::vector<Check> oracle_suite(const Kernels& kernels, const Options& options) {
  std::mt19937_64 rng = make_rng(options.seed, 0x0AC1);
  double scl_err = 0.0, comb_err = 0.0, ind_err = 0.0;
  for (int b = 0; b < options.oracle_batches; ++b) {
    const int rows = uniform_int(rng, 4, 32);
    const int dim = uniform_int(rng, 2, 16);
    const double t = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    const int k = uniform_int(rng, 2, 6);
    const Matrix z = random_unit_rows(rng, rows, dim);
    const Labels labels = random_labels(rng, rows, k);
    scl_err = std::max(scl_err, std::abs(kernels.scl(z, labels, t, nullptr, NormCheck::kEnforce) -
                                         oracle::oracle_scl(z, labels, t)));

    const int n = std::max(2, rows / 2);
    const int m = uniform_int(rng, 2, 4);
    const DualEmbeddings d = random_dual(rng, n, dim, k, m);
    const LabelSpace space(k, m);
    comb_err = std::max(comb_err, std::abs(dscl_comb(d, space, t) -
                                           oracle::oracle_dscl_comb(d, k, t)));
    ind_err = std::max(ind_err, std::abs(dscl_ind(d, t) - oracle::oracle_dscl_ind(d, t)));
  }
  const std::string detail = fmt::format("{} random batches", options.oracle_batches);
  return {make_check(1, "sup_contrastive vs oracle", scl_err, 1e-6, detail),
          make_check(1, "dscl_comb vs oracle", comb_err, 1e-6, detail),
          make_check(1, "dscl_ind vs oracle", ind_err, 1e-6, detail)};
}

std::vector<Check> closed_form_suite(const Kernels& kernels) {
  const double expected = std::log(1.0 + 2.0 / std::exp(1.0));
  std::vector<Check> out;

  Matrix four(4, 2);
  four << 1, 0, 1, 0, 0, 1, 0, 1;
  const Labels four_labels{0, 0, 1, 1};
  out.push_back(make_check(2, "four-point sup_contrastive = log(1+2/e)",
                           std::abs(kernels.scl(four, four_labels, 1.0, nullptr,
                                                NormCheck::kEnforce) - expected),
                           1e-9));

  DualEmbeddings d;
  d.z_v = Matrix(2, 2);
  d.z_v << 1, 0, 1, 0;
  d.z_s = Matrix(2, 2);
  d.z_s << 0, 1, 0, 1;
  d.class_labels = {0, 0};
  d.domain_labels = {0, 0};
  out.push_back(make_check(2, "dual example dscl_comb = log(1+2/e)",
                           std::abs(dscl_comb(d, LabelSpace(1, 1), 1.0) - expected), 1e-9));
  out.push_back(make_check(2, "dual example dscl_ind = 2 log(1+2/e)",
                           std::abs(dscl_ind(d, 1.0) - 2.0 * expected), 1e-9));

  const Labels y{0, 3, 6}, y_dom{0, 1, 3};
  const double uniform = ce_dis(Matrix::Zero(3, 7), Matrix::Zero(3, 4), y, y_dom);
  out.push_back(make_check(2, "uniform ce_dis K=7 M=4 = ln 7 + ln 4",
                           std::abs(uniform - (std::log(7.0) + std::log(4.0))), 1e-9));
  return out;
}

std::vector<Check> gradient_suite(const Kernels& kernels, const Options& options) {
  std::mt19937_64 rng = make_rng(options.seed, 0x6AD);
  const double h = options.fd_step;
  double scl_err = 0.0, comb_err = 0.0, ind_err = 0.0, ce_err = 0.0;
  for (int inst = 0; inst < options.gradient_instances; ++inst) {
    const int n = uniform_int(rng, 2, 5);
    const int dim = uniform_int(rng, 2, 5);
    const int k = uniform_int(rng, 2, 3);
    const int m = uniform_int(rng, 2, 3);
    const double t = std::uniform_real_distribution<double>(0.1, 1.0)(rng);

    const Matrix z = random_unit_rows(rng, 2 * n, dim);
    const Labels labels = random_labels(rng, 2 * n, k);
    Matrix g;
    kernels.scl(z, labels, t, &g, NormCheck::kSkip);
    const Matrix g_num = finite_difference(
        [&](const Matrix& x) { return kernels.scl(x, labels, t, nullptr, NormCheck::kSkip); }, z,
        h);
    scl_err = std::max(scl_err, max_relative_error(g, g_num));

    const DualEmbeddings d = random_dual(rng, 2 * n, dim, k, m);
    const LabelSpace space(k, m);
    const Matrix zz = stack(d.z_v, d.z_s);
    DualGradient dg;
    dscl_comb(d, space, t, &dg, NormCheck::kSkip);
    comb_err = std::max(
        comb_err,
        max_relative_error(stack(dg.d_z_v, dg.d_z_s),
                           finite_difference(
                               [&](const Matrix& x) {
                                 return dscl_comb(split_dual(x, d), space, t, nullptr,
                                                  NormCheck::kSkip);
                               },
                               zz, h)));
    dscl_ind(d, t, &dg, NormCheck::kSkip);
    ind_err = std::max(
        ind_err,
        max_relative_error(stack(dg.d_z_v, dg.d_z_s),
                           finite_difference(
                               [&](const Matrix& x) {
                                 return dscl_ind(split_dual(x, d), t, nullptr, NormCheck::kSkip);
                               },
                               zz, h)));

    const Matrix class_logits = random_matrix(rng, 2 * n, k, 2.0);
    const Matrix domain_logits = random_matrix(rng, 2 * n, m, 2.0);
    CeGradient cg;
    ce_dis(class_logits, domain_logits, d.class_labels, d.domain_labels, &cg);
    const Matrix num_class = finite_difference(
        [&](const Matrix& x) {
          return ce_dis(x, domain_logits, d.class_labels, d.domain_labels);
        },
        class_logits, h);
    const Matrix num_domain = finite_difference(
        [&](const Matrix& x) {
          return ce_dis(class_logits, x, d.class_labels, d.domain_labels);
        },
        domain_logits, h);
    ce_err = std::max({ce_err, max_relative_error(cg.d_class_logits, num_class),
                       max_relative_error(cg.d_domain_logits, num_domain)});
  }
  const std::string detail =
      fmt::format("{} instances, central step {:g}", options.gradient_instances, h);
  return {make_check(3, "sup_contrastive gradient", scl_err, 1e-4, detail),
          make_check(3, "dscl_comb gradient", comb_err, 1e-4, detail),
          make_check(3, "dscl_ind gradient", ind_err, 1e-4, detail),
          make_check(3, "ce_dis gradient", ce_err, 1e-4, detail)};
}

namespace {

double max_grad(const std::vector<Parameter*>& params) {
  double out = 0.0;
  for (const Parameter* p : params) {
    for (float g : p->grad) out = std::max(out, static_cast<double>(std::abs(g)));
  }
  return out;
}

}  // namespace

std::vector<Check> structural_suite(const Kernels& kernels, const Options& options) {
  std::mt19937_64 rng = make_rng(options.seed, 0x57C);
  std::vector<Check> out;

  // Permutation invariance.
  double perm_drift = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = uniform_int(rng, 3, 12);
    const int dim = uniform_int(rng, 2, 8);
    const double t = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    const DualEmbeddings d = random_dual(rng, n, dim, 3, 3);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DualEmbeddings p = d;
    for (int i = 0; i < n; ++i) {
      const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
      p.z_v.row(i) = d.z_v.row(static_cast<Eigen::Index>(src));
      p.z_s.row(i) = d.z_s.row(static_cast<Eigen::Index>(src));
      p.class_labels[static_cast<std::size_t>(i)] = d.class_labels[src];
      p.domain_labels[static_cast<std::size_t>(i)] = d.domain_labels[src];
    }
    const LabelSpace space(3, 3);
    perm_drift = std::max(
        {perm_drift,
         std::abs(kernels.scl(d.z_v, d.class_labels, t, nullptr, NormCheck::kEnforce) -
                  kernels.scl(p.z_v, p.class_labels, t, nullptr, NormCheck::kEnforce)),
         std::abs(dscl_comb(d, space, t) - dscl_comb(p, space, t)),
         std::abs(dscl_ind(d, t) - dscl_ind(p, t))});
  }
  out.push_back(make_check(4, "permutation invariance", perm_drift, 1e-9, "20 shuffles"));

  // Nonnegativity.
  double most_negative = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = uniform_int(rng, 2, 16);
    const double t = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
    const DualEmbeddings d = random_dual(rng, n, uniform_int(rng, 2, 8), 3, 2);
    for (double v : {kernels.scl(d.z_v, d.class_labels, t, nullptr, NormCheck::kEnforce),
                     dscl_comb(d, LabelSpace(3, 2), t), dscl_ind(d, t)}) {
      most_negative = std::max(most_negative, -v);
    }
  }
  out.push_back(make_check(4, "nonnegativity", most_negative, 0.0, "50 batches"));

  // Empty-positive skip: the singleton anchor neither contributes nor counts.
  Matrix three(3, 2);
  three << 1, 0, 1, 0, 0, 1;
  const double skip = kernels.scl(three, Labels{0, 0, 1}, 1.0, nullptr, NormCheck::kEnforce);
  double skip_err = std::abs(skip - std::log(1.0 + 1.0 / std::exp(1.0)));
  const Matrix distinct = random_unit_rows(rng, 5, 3);
  skip_err = std::max(skip_err, std::abs(kernels.scl(distinct, Labels{0, 1, 2, 3, 4}, 0.1,
                                                     nullptr, NormCheck::kEnforce)));
  DualEmbeddings lonely = random_dual(rng, 4, 3, 4, 4);
  lonely.class_labels = {0, 1, 2, 3};
  lonely.domain_labels = {0, 1, 2, 3};
  skip_err = std::max(skip_err, std::abs(dscl_ind(lonely, 0.1)));
  out.push_back(make_check(4, "empty-positive anchors skipped", skip_err, 1e-12,
                           "singleton anchor and all-distinct batches"));

  // Combined encoding never pairs a class row with a domain row.
  int cross_positive = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = uniform_int(rng, 1, 7);
    const int m = uniform_int(rng, 1, 7);
    const int n = uniform_int(rng, 1, 10);
    const DualEmbeddings d = random_dual(rng, n, 3, k, m);
    const MixedEmbeddings mixed = concat_mixed(d, LabelSpace(k, m));
    for (int i = 0; i < n; ++i) {
      for (int j = n; j < 2 * n; ++j) {
        if (mixed.labels[static_cast<std::size_t>(i)] == mixed.labels[static_cast<std::size_t>(j)]) {
          ++cross_positive;
        }
      }
    }
  }
  out.push_back(make_check(4, "combined labels never cross types", cross_positive, 0.0,
                           "20 random label spaces"));

  // Large-temperature limit.
  double limit_err = 0.0;
  const double big_t = 1e6;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = uniform_int(rng, 2, 8);
    const DualEmbeddings d = random_dual(rng, n, 4, 2, 2);
    const auto b = static_cast<std::size_t>(n);
    limit_err = std::max(
        limit_err,
        std::abs(kernels.scl(d.z_v, d.class_labels, big_t, nullptr, NormCheck::kEnforce) -
                 mean_log_denominator(d.class_labels, b - 1)));
    Labels combined = d.class_labels;
    for (int l : d.domain_labels) combined.push_back(2 + l);
    limit_err = std::max(limit_err, std::abs(dscl_comb(d, LabelSpace(2, 2), big_t) -
                                             mean_log_denominator(combined, 2 * b - 1)));
    limit_err = std::max(limit_err, std::abs(dscl_ind(d, big_t) -
                                             mean_log_denominator(d.class_labels, 2 * b - 1) -
                                             mean_log_denominator(d.domain_labels, 2 * b - 1)));
  }
  out.push_back(make_check(4, "temperature limit log|A(i)| at t=1e6", limit_err, 1e-3));

  // Path separation through the networks.
  EncoderSpec spec;
  spec.architecture = Architecture::kMlp;
  spec.input = {4, 4, 3};
  spec.embedding_dim = 4;
  spec.widths = {8};
  const ModelBundle base = init_bundle(spec, LabelSpace(3, 2), options.seed);
  AugmentedBatch batch;
  batch.images = ImageBatch(6, spec.input);
  std::uniform_real_distribution<float> pixel(0.0f, 1.0f);
  for (float& v : batch.images.pixels) v = pixel(rng);
  batch.class_labels = {0, 1, 2, 0, 1, 2};
  batch.domain_labels = {0, 1, 1, 0, 1, 1};
  batch.source_index = {0, 1, 2, 0, 1, 2};

  struct Case {
    const char* name;
    Objective objective;
    bool touches_v_encoder, touches_v_head, touches_s_encoder, touches_s_head;
  };
  Objective class_only{1.0, 0.0, ContrastiveTerm::kNone, 0.0, 0.1, true};
  Objective domain_only{0.0, 1.0, ContrastiveTerm::kNone, 0.0, 0.1, true};
  Objective contrastive_only{0.0, 0.0, ContrastiveTerm::kComb, 1.0, 0.1, true};
  const Case cases[] = {{"class CE", class_only, true, true, false, false},
                        {"domain CE", domain_only, false, false, true, true},
                        {"dscl_comb", contrastive_only, true, false, true, false}};
  double leaked = 0.0;
  double weakest_active = std::numeric_limits<double>::infinity();
  for (const Case& c : cases) {
    ModelBundle bundle = base;
    accumulate_gradients(bundle, batch, c.objective);
    const std::pair<std::vector<Parameter*>, bool> groups[] = {
        {bundle.g_v.parameters(), c.touches_v_encoder},
        {bundle.f_v.parameters(), c.touches_v_head},
        {bundle.g_s.parameters(), c.touches_s_encoder},
        {bundle.f_s.parameters(), c.touches_s_head}};
    for (const auto& [params, active] : groups) {
      const double g = max_grad(params);
      if (active) {
        weakest_active = std::min(weakest_active, g);
      } else {
        leaked = std::max(leaked, g);
      }
    }
  }
  out.push_back(make_check(4, "path separation: no cross-branch gradient", leaked, 0.0,
                           fmt::format("smallest active-group gradient {:.3e}",
                                       weakest_active)));
  out.back().passed = out.back().passed && weakest_active > 0.0;
  return out;
}

Report run_all(const Kernels& kernels, const Options& options) {
  Report report;
  auto timed = [&](auto&& suite) {
    const auto start = Clock::now();
    std::vector<Check> checks = suite();
    report.seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    for (Check& c : checks) report.checks.push_back(std::move(c));
  };
  timed([&] { return oracle_suite(kernels, options); });
  timed([&] { return closed_form_suite(kernels); });
  timed([&] { return gradient_suite(kernels, options); });
  timed([&] { return structural_suite(kernels, options); });
  return report;
}

namespace fixtures {

Kernels mutant_scl_denominator_sign() {
  Kernels k;
  k.scl = [](const Matrix& z, std::span<const int> labels, double t, Matrix* grad,
             NormCheck check) {
    const double honest = sup_contrastive(z, labels, t, grad, check);
    (void)honest;
    double total = 0.0;
    int anchors = 0;
    const Matrix logits = z * z.transpose() / t;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      double denom = 0.0;
      for (Eigen::Index a = 0; a < z.rows(); ++a) {
        if (a != i) denom += std::exp(logits(i, a));
      }
      double acc = 0.0;
      int positives = 0;
      for (Eigen::Index p = 0; p < z.rows(); ++p) {
        if (p == i || labels[static_cast<std::size_t>(p)] != labels[static_cast<std::size_t>(i)]) {
          continue;
        }
        acc += logits(i, p) + std::log(denom);
        ++positives;
      }
      if (positives == 0) continue;
      total += -acc / positives;
      ++anchors;
    }
    return anchors == 0 ? 0.0 : total / anchors;
  };
  return k;
}

}  // namespace fixtures

}  // namespace cddg::verify
