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
#ifndef CDDG_DATASET_HPP_
#define CDDG_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "cddg/core.hpp"

namespace cddg {

enum class Provenance { kSynthetic, kDirectory };

struct DGDataset {
  std::vector<LabeledExample> examples;
  LabelSpace space{1, 1};
  // Indexed by label; both lists are in lexicographic order.
  std::vector<std::string> domain_names;
  std::vector<std::string> class_names;
  ImageShape image_shape;
  Provenance provenance = Provenance::kSynthetic;

  // Rebuilds the id -> index map. Call after editing examples.
  void reindex();
  std::size_t index_of(const std::string& example_id) const;
  int domain_label(const std::string& domain_name) const;

  // Label ranges, image shapes, unique ids.
  void validate() const;

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Desk-scale stand-in for a style-shift benchmark: the class is the glyph
// that is drawn, the domain is how it is rendered (palette, background
// texture, pixel noise). The two factors are sampled independently.
struct SyntheticSpec {
  int num_classes = 5;
  int num_domains = 4;
  int n_per_cell = 100;
  int image_size = 32;
  // 0 renders every domain identically; 1 applies the full domain style.
  double nuisance_strength = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr int kMaxSyntheticClasses = 8;
inline constexpr int kMinSyntheticImageSize = 8;

DGDataset generate_synthetic(const SyntheticSpec& spec);

// Reads root/<domain>/<class>/*.{png,jpg,jpeg}. Domains and classes are
// labelled in lexicographic order of their directory names; images are
// resized (bilinear) to image_size x image_size RGB in [0, 1].
DGDataset load_directory(const std::filesystem::path& root, int image_size);

// Writes the dataset in the layout load_directory() reads, as PNG files.
void write_directory(const DGDataset& ds, const std::filesystem::path& root);

// Leave-one-domain-out split. Ids are example ids of the dataset.
struct SplitPlan {
  std::string target_domain;
  std::vector<std::string> source_train;
  std::vector<std::string> source_val;
  std::vector<std::string> target_all;
  std::uint64_t seed = 0;
};

inline constexpr double kTrainFraction = 0.8;

// Holds out every example of target; splits each remaining domain 80/20
// with a shuffle derived from (seed, domain).
SplitPlan leave_one_out(const DGDataset& ds, const std::string& target,
                        std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> source_train;
  std::vector<std::size_t> source_val;
  std::vector<std::size_t> target_all;
};

SplitIndices resolve(const SplitPlan& plan, const DGDataset& ds);

// Stacks dataset images (no augmentation) into a batch.
ImageBatch gather_images(const DGDataset& ds, std::span<const std::size_t> indices);

}  // namespace cddg

#endif  // CDDG_DATASET_HPP_
