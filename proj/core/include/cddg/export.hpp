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
#ifndef CDDG_EXPORT_HPP_
#define CDDG_EXPORT_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cddg/dataset.hpp"
#include "cddg/networks.hpp"

namespace cddg {

// CSV with header "example_id,branch,class_label,domain_label,e0,...". Two
// rows per example (g_v, then g_s), values printed with 9 significant digits.
// Returns the number of data rows written.
std::size_t export_embeddings(const ModelBundle& bundle, const DGDataset& ds,
                              std::span<const std::size_t> indices,
                              const std::filesystem::path& path);

// Rows of a principal-component projection to two dimensions, fitted per
// branch. Component signs are fixed so the largest loading is positive.
struct PlotPoint {
  std::string example_id;
  Branch branch = Branch::kClass;
  int class_label = 0;
  int domain_label = 0;
  double x = 0.0;
  double y = 0.0;
};

std::vector<PlotPoint> project_2d(const ModelBundle& bundle, const DGDataset& ds,
                                  std::span<const std::size_t> indices);

// CSV with header "example_id,branch,class_label,domain_label,x,y".
void write_plot_data(std::span<const PlotPoint> points, const std::filesystem::path& path);

}  // namespace cddg

#endif  // CDDG_EXPORT_HPP_
