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
#include "cddg/export.hpp"

#include <fstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "cddg/errors.hpp"
#include "cddg/evaluation.hpp"

namespace cddg {
namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

Matrix principal_axes(const Matrix& centered) {
  const Matrix cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  const Eigen::Index d = centered.cols();
  const Eigen::Index k = std::min<Eigen::Index>(2, d);
  Matrix axes = Matrix::Zero(d, 2);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0.0) v = -v;
    axes.col(c) = v;
  }
  return axes;
}

}  // namespace

std::size_t export_embeddings(const ModelBundle& bundle, const DGDataset& ds,
                              std::span<const std::size_t> indices,
                              const std::filesystem::path& path) {
  std::ofstream out = open_for_writing(path);
  const Matrix z_v = embed(bundle, Branch::kClass, ds, indices);
  const Matrix z_s = embed(bundle, Branch::kDomain, ds, indices);
  std::string line = "example_id,branch,class_label,domain_label";
  for (int j = 0; j < bundle.spec.embedding_dim; ++j) line += fmt::format(",e{}", j);
  out << line << '\n';
  std::size_t rows = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const LabeledExample& e = ds.examples[indices[i]];
    for (Branch branch : {Branch::kClass, Branch::kDomain}) {
      const Matrix& z = branch == Branch::kClass ? z_v : z_s;
      line = fmt::format("{},{},{},{}", e.example_id, to_string(branch), e.class_label, e.domain_label);
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        line += fmt::format(",{:.9g}", z(static_cast<Eigen::Index>(i), j));
      }
      out << line << '\n';
      ++rows;
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
  return rows;
}

std::vector<PlotPoint> project_2d(const ModelBundle& bundle, const DGDataset& ds,
                                  std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("projection needs at least one example");
  std::vector<PlotPoint> points;
  for (Branch branch : {Branch::kClass, Branch::kDomain}) {
    const Matrix z = embed(bundle, branch, ds, indices);
    const Matrix centered = z.rowwise() - z.colwise().mean();
    const Matrix xy = centered * principal_axes(centered);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const LabeledExample& e = ds.examples[indices[i]];
      const auto r = static_cast<Eigen::Index>(i);
      points.push_back({e.example_id, branch, e.class_label, e.domain_label, xy(r, 0), xy(r, 1)});
    }
  }
  return points;
}

void write_plot_data(std::span<const PlotPoint> points, const std::filesystem::path& path) {
  std::ofstream out = open_for_writing(path);
  out << "example_id,branch,class_label,domain_label,x,y\n";
  for (const PlotPoint& p : points) {
    out << fmt::format("{},{},{},{},{:.9g},{:.9g}\n", p.example_id, to_string(p.branch),
                       p.class_label, p.domain_label, p.x, p.y);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace cddg
