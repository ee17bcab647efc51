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
#include "cddg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cddg/errors.hpp"

namespace cddg {

namespace fs = std::filesystem;

void DGDataset::reindex() {
  index_.clear();
  index_.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    index_.emplace(examples[i].example_id, i);
  }
}

std::size_t DGDataset::index_of(const std::string& example_id) const {
  auto it = index_.find(example_id);
  if (it == index_.end()) throw RangeError("unknown example id '" + example_id + "'");
  return it->second;
}

int DGDataset::domain_label(const std::string& domain_name) const {
  auto it = std::find(domain_names.begin(), domain_names.end(), domain_name);
  if (it == domain_names.end()) {
    throw RangeError("unknown domain '" + domain_name + "'");
  }
  return static_cast<int>(it - domain_names.begin());
}

void DGDataset::validate() const {
  if (static_cast<int>(domain_names.size()) != space.num_domains() ||
      static_cast<int>(class_names.size()) != space.num_classes()) {
    throw ShapeError("dataset name lists disagree with its label space");
  }
  std::set<std::string> ids;
  for (const LabeledExample& ex : examples) {
    if (ex.class_label < 0 || ex.class_label >= space.num_classes() ||
        ex.domain_label < 0 || ex.domain_label >= space.num_domains()) {
      throw RangeError("example '" + ex.example_id + "' has out-of-range labels");
    }
    if (ex.image.shape != image_shape || ex.image.pixels.size() != image_shape.size()) {
      throw ShapeError("example '" + ex.example_id + "' is " +
                       to_string(ex.image.shape) + ", dataset declares " +
                       to_string(image_shape));
    }
    if (!ids.insert(ex.example_id).second) {
      throw ContractError("duplicate example id '" + ex.example_id + "'");
    }
  }
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::string> sorted_subdirs(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

Image decode_image(const fs::path& path, int image_size) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IngestionError("cannot decode image " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (rgb.rows != image_size || rgb.cols != image_size) {
    cv::Mat resized;
    cv::resize(rgb, resized, cv::Size(image_size, image_size), 0, 0, cv::INTER_LINEAR);
    rgb = resized;
  }
  Image img{{image_size, image_size, 3},
            FloatBuffer(static_cast<std::size_t>(image_size) * image_size * 3)};
  for (int y = 0; y < image_size; ++y) {
    const auto* row = rgb.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image_size; ++x) {
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = row[x][c] / 255.0f;
    }
  }
  return img;
}

}  // namespace

DGDataset load_directory(const fs::path& root, int image_size) {
  if (image_size < 1) throw ConfigError("image_size must be positive");
  if (!fs::is_directory(root)) {
    throw IngestionError("dataset root " + root.string() + " is not a directory");
  }
  const std::vector<std::string> domains = sorted_subdirs(root);
  if (domains.size() < 2) {
    throw IngestionError("dataset root " + root.string() + " needs >= 2 domain directories");
  }
  std::set<std::string> class_set;
  for (const auto& d : domains) {
    for (const auto& c : sorted_subdirs(root / d)) class_set.insert(c);
  }
  const std::vector<std::string> classes(class_set.begin(), class_set.end());
  if (classes.size() < 2) {
    throw IngestionError("dataset root " + root.string() + " needs >= 2 class directories");
  }

  std::vector<std::string> missing;
  for (const auto& d : domains) {
    for (const auto& c : classes) {
      if (sorted_images(root / d / c).empty()) missing.push_back((root / d / c).string());
    }
  }
  if (!missing.empty()) {
    throw IngestionError(fmt::format("missing or empty (domain, class) cells: {}",
                                     fmt::join(missing, ", ")));
  }

  DGDataset ds;
  ds.space = LabelSpace(static_cast<int>(classes.size()), static_cast<int>(domains.size()));
  ds.domain_names = domains;
  ds.class_names = classes;
  ds.image_shape = {image_size, image_size, 3};
  ds.provenance = Provenance::kDirectory;
  for (std::size_t d = 0; d < domains.size(); ++d) {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (const fs::path& file : sorted_images(root / domains[d] / classes[c])) {
        LabeledExample ex;
        ex.image = decode_image(file, image_size);
        ex.class_label = static_cast<int>(c);
        ex.domain_label = static_cast<int>(d);
        ex.domain_name = domains[d];
        ex.example_id = domains[d] + "/" + classes[c] + "/" + file.filename().string();
        ds.examples.push_back(std::move(ex));
      }
    }
  }
  ds.reindex();
  return ds;
}

void write_directory(const DGDataset& ds, const fs::path& root) {
  for (const LabeledExample& ex : ds.examples) {
    const fs::path dir = root / ds.domain_names[ex.domain_label] / ds.class_names[ex.class_label];
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const std::string stem = fs::path(ex.example_id).stem().string();
    const ImageShape& s = ex.image.shape;
    cv::Mat bgr(s.height, s.width, CV_8UC3);
    for (int y = 0; y < s.height; ++y) {
      auto* row = bgr.ptr<cv::Vec3b>(y);
      for (int x = 0; x < s.width; ++x) {
        for (int c = 0; c < 3; ++c) {
          const float v = std::clamp(ex.image.at(y, x, c), 0.0f, 1.0f);
          row[x][2 - c] = static_cast<unsigned char>(std::lround(v * 255.0f));
        }
      }
    }
    const fs::path file = dir / (stem + ".png");
    if (!cv::imwrite(file.string(), bgr)) throw IoError("cannot write " + file.string());
  }
}

SplitPlan leave_one_out(const DGDataset& ds, const std::string& target,
                        std::uint64_t seed) {
  const int target_label = ds.domain_label(target);
  SplitPlan plan;
  plan.target_domain = target;
  plan.seed = seed;
  for (int d = 0; d < ds.space.num_domains(); ++d) {
    std::vector<std::string> ids;
    for (const LabeledExample& ex : ds.examples) {
      if (ex.domain_label == d) ids.push_back(ex.example_id);
    }
    if (d == target_label) {
      plan.target_all = std::move(ids);
      continue;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32), 0x5B1u,
                      static_cast<std::uint32_t>(d)};
    std::mt19937_64 rng(seq);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(kTrainFraction * ids.size()));
    plan.source_train.insert(plan.source_train.end(), ids.begin(), ids.begin() + n_train);
    plan.source_val.insert(plan.source_val.end(), ids.begin() + n_train, ids.end());
  }
  return plan;
}

SplitIndices resolve(const SplitPlan& plan, const DGDataset& ds) {
  SplitIndices out;
  for (const auto& id : plan.source_train) out.source_train.push_back(ds.index_of(id));
  for (const auto& id : plan.source_val) out.source_val.push_back(ds.index_of(id));
  for (const auto& id : plan.target_all) out.target_all.push_back(ds.index_of(id));
  return out;
}

ImageBatch gather_images(const DGDataset& ds, std::span<const std::size_t> indices) {
  ImageBatch batch(static_cast<int>(indices.size()), ds.image_shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& px = ds.examples[indices[i]].image.pixels;
    std::copy(px.begin(), px.end(), batch.image(static_cast<int>(i)).begin());
  }
  return batch;
}

}  // namespace cddg
