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
#ifndef CDDG_AUGMENT_HPP_
#define CDDG_AUGMENT_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "cddg/core.hpp"
#include "cddg/dataset.hpp"

namespace cddg {

// Standard image augmentation: random resized crop, horizontal flip,
// color jitter, random grayscale.
struct AugmentConfig {
  bool enabled = true;
  // When set, the first view of every pair is the unmodified image.
  bool identity_first_view = false;
  double crop_scale_min = 0.6;
  double crop_ratio_min = 3.0 / 4.0;
  double crop_ratio_max = 4.0 / 3.0;
  double flip_probability = 0.5;
  double jitter_probability = 0.8;
  double brightness = 0.4;
  double contrast = 0.4;
  double saturation = 0.4;
  double grayscale_probability = 0.2;

  void validate() const;
};

Image augment(const Image& image, const AugmentConfig& config,
              std::mt19937_64& rng);

// Bilinear resample of the box [x0, x0 + w) x [y0, y0 + h) (pixel units) to
// out_shape.
Image resample_bilinear(const Image& image, double x0, double y0, double w,
                        double h, const ImageShape& out_shape);

// Endless stream of two-view batches over a pool of example indices.
// Every epoch reshuffles with a seed derived from (seed, epoch); each
// sample's augmentation draws from (seed, epoch, batch, row), so the stream
// depends only on its inputs.
class BatchStream {
 public:
  BatchStream(const DGDataset& ds, std::vector<std::size_t> pool, int base_size,
              AugmentConfig config, std::uint64_t seed);

  AugmentedBatch next();

  int epoch() const { return epoch_; }

 private:
  void reshuffle();

  const DGDataset* ds_;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> order_;
  int base_size_;
  AugmentConfig config_;
  std::uint64_t seed_;
  int epoch_ = -1;
  std::size_t cursor_ = 0;
  int batch_in_epoch_ = 0;
};

// Batches of 2N rows drawn from plan.source_train.
BatchStream make_batches(const SplitPlan& plan, const DGDataset& ds, int base_size,
                         const AugmentConfig& config, std::uint64_t seed);

}  // namespace cddg

#endif  // CDDG_AUGMENT_HPP_
