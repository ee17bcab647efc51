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
#ifndef CDDG_CORE_HPP_
#define CDDG_CORE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace cddg {

// Embeddings and loss inputs are carried in 64-bit; network weights in 32-bit.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = std::vector<int>;

// Float storage with a fixed base alignment, so vectorized reductions over
// mapped buffers round the same way in every process.
using FloatBuffer = std::vector<float, Eigen::aligned_allocator<float>>;

// Row norms of normalized embeddings must be within this of 1.
inline constexpr double kUnitNormTolerance = 1e-6;

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

std::string to_string(const ImageShape& shape);

// Channels-last (HWC) image with values in [0, 1].
struct Image {
  ImageShape shape;
  FloatBuffer pixels;

  float& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * shape.width + x) *
                      shape.channels + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * shape.width + x) *
                      shape.channels + c];
  }
};

// A contiguous NHWC stack of equally shaped images.
struct ImageBatch {
  int count = 0;
  ImageShape shape;
  FloatBuffer pixels;

  ImageBatch() = default;
  ImageBatch(int count, ImageShape shape)
      : count(count), shape(shape), pixels(count * shape.size(), 0.0f) {}

  std::span<float> image(int i) {
    return {pixels.data() + i * shape.size(), shape.size()};
  }
  std::span<const float> image(int i) const {
    return {pixels.data() + i * shape.size(), shape.size()};
  }
};

struct LabeledExample {
  Image image;
  int class_label = 0;
  int domain_label = 0;
  std::string domain_name;
  std::string example_id;
};

enum class LabelKind { kClass, kDomain };

// Class labels occupy [0, K) and domain labels [K, K + M) of the combined
// space, so the two never collide.
class LabelSpace {
 public:
  LabelSpace(int num_classes, int num_domains);

  int num_classes() const { return num_classes_; }
  int num_domains() const { return num_domains_; }
  int combined_size() const { return num_classes_ + num_domains_; }

  int combined_label(LabelKind kind, int raw) const;
  std::pair<LabelKind, int> decode(int combined) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  int num_classes_;
  int num_domains_;
};

// Two augmented views of N samples: rows i and i + N come from the same
// source example.
struct AugmentedBatch {
  ImageBatch images;
  Labels class_labels;
  Labels domain_labels;
  std::vector<std::size_t> source_index;

  int base_size() const { return images.count / 2; }
  int rows() const { return images.count; }

  // Throws ShapeError/ContractError if the pairing invariant is broken.
  void validate() const;
};

// Per-batch class features (z_v) and domain features (z_s), row-aligned
// with the batch they were computed from.
struct DualEmbeddings {
  Matrix z_v;
  Matrix z_s;
  Labels class_labels;
  Labels domain_labels;

  Eigen::Index rows() const { return z_v.rows(); }
  void validate(double tolerance = kUnitNormTolerance) const;
};

struct MixedEmbeddings {
  Matrix z;
  Labels labels;
};

// Stacks [z_v; z_s] with labels mapped into the combined space.
MixedEmbeddings concat_mixed(const DualEmbeddings& d, const LabelSpace& space);

// Largest |‖row‖ - 1| over all rows.
double max_unit_norm_deviation(const Matrix& z);

// Returns z with every row scaled to unit length.
Matrix normalize_rows(const Matrix& z);

}  // namespace cddg

#endif  // CDDG_CORE_HPP_
