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
#include "cddg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cddg/errors.hpp"

namespace cddg {

namespace {

std::mt19937_64 rng_for(std::uint64_t seed, std::initializer_list<std::uint32_t> tags) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  words.insert(words.end(), tags);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kStreamEpoch = 0xE90C;
constexpr std::uint32_t kStreamSample = 0xA06;

float gray(const Image& img, int y, int x) {
  return 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
}

}  // namespace

void AugmentConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(crop_scale_min > 0.0 && crop_scale_min <= 1.0)) {
    throw ConfigError("crop_scale_min must be in (0, 1]");
  }
  if (!(crop_ratio_min > 0.0 && crop_ratio_min <= crop_ratio_max)) {
    throw ConfigError("crop ratio range is empty");
  }
  if (!unit(flip_probability) || !unit(jitter_probability) ||
      !unit(grayscale_probability)) {
    throw ConfigError("augmentation probabilities must be in [0, 1]");
  }
  if (!unit(brightness) || !unit(contrast) || !unit(saturation)) {
    throw ConfigError("color jitter strengths must be in [0, 1]");
  }
}

Image resample_bilinear(const Image& image, double x0, double y0, double w,
                        double h, const ImageShape& out_shape) {
  const ImageShape& in = image.shape;
  Image out{out_shape, FloatBuffer(out_shape.size())};
  for (int oy = 0; oy < out_shape.height; ++oy) {
    const double sy = std::clamp(y0 + (oy + 0.5) * h / out_shape.height - 0.5, 0.0,
                                 static_cast<double>(in.height - 1));
    const int y_lo = static_cast<int>(std::floor(sy));
    const int y_hi = std::min(y_lo + 1, in.height - 1);
    const float fy = static_cast<float>(sy - y_lo);
    for (int ox = 0; ox < out_shape.width; ++ox) {
      const double sx = std::clamp(x0 + (ox + 0.5) * w / out_shape.width - 0.5, 0.0,
                                   static_cast<double>(in.width - 1));
      const int x_lo = static_cast<int>(std::floor(sx));
      const int x_hi = std::min(x_lo + 1, in.width - 1);
      const float fx = static_cast<float>(sx - x_lo);
      for (int c = 0; c < in.channels; ++c) {
        const float top = (1 - fx) * image.at(y_lo, x_lo, c) + fx * image.at(y_lo, x_hi, c);
        const float bottom = (1 - fx) * image.at(y_hi, x_lo, c) + fx * image.at(y_hi, x_hi, c);
        out.at(oy, ox, c) = (1 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

Image augment(const Image& image, const AugmentConfig& config, std::mt19937_64& rng) {
  if (!config.enabled) return image;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ImageShape& s = image.shape;

  // Random resized crop.
  const double area = s.height * s.width;
  const double scale = config.crop_scale_min + (1.0 - config.crop_scale_min) * unit(rng);
  const double log_lo = std::log(config.crop_ratio_min);
  const double log_hi = std::log(config.crop_ratio_max);
  const double ratio = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
  const double crop_w = std::min<double>(s.width, std::sqrt(area * scale * ratio));
  const double crop_h = std::min<double>(s.height, std::sqrt(area * scale / ratio));
  const double x0 = (s.width - crop_w) * unit(rng);
  const double y0 = (s.height - crop_h) * unit(rng);
  Image out = resample_bilinear(image, x0, y0, crop_w, crop_h, s);

  if (unit(rng) < config.flip_probability) {
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width / 2; ++x) {
        for (int c = 0; c < s.channels; ++c) {
          std::swap(out.at(y, x, c), out.at(y, s.width - 1 - x, c));
        }
      }
    }
  }

  const bool color = s.channels == 3;
  if (unit(rng) < config.jitter_probability) {
    const float b = static_cast<float>(1.0 + config.brightness * (2.0 * unit(rng) - 1.0));
    const float k = static_cast<float>(1.0 + config.contrast * (2.0 * unit(rng) - 1.0));
    const float sat = static_cast<float>(1.0 + config.saturation * (2.0 * unit(rng) - 1.0));
    for (float& v : out.pixels) v *= b;
    float mean = 0.0f;
    if (color) {
      for (int y = 0; y < s.height; ++y)
        for (int x = 0; x < s.width; ++x) mean += gray(out, y, x);
      mean /= static_cast<float>(s.height * s.width);
    } else {
      mean = std::accumulate(out.pixels.begin(), out.pixels.end(), 0.0f) /
             static_cast<float>(out.pixels.size());
    }
    for (float& v : out.pixels) v = mean + (v - mean) * k;
    if (color) {
      for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
          const float g = gray(out, y, x);
          for (int c = 0; c < 3; ++c) out.at(y, x, c) = g + (out.at(y, x, c) - g) * sat;
        }
      }
    }
  }
  if (color && unit(rng) < config.grayscale_probability) {
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) {
        const float g = gray(out, y, x);
        for (int c = 0; c < 3; ++c) out.at(y, x, c) = g;
      }
    }
  }
  for (float& v : out.pixels) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

BatchStream::BatchStream(const DGDataset& ds, std::vector<std::size_t> pool,
                         int base_size, AugmentConfig config, std::uint64_t seed)
    : ds_(&ds),
      pool_(std::move(pool)),
      base_size_(base_size),
      config_(config),
      seed_(seed) {
  config_.validate();
  if (base_size < 2) {
    throw ConfigError(fmt::format("batch size N must be >= 2, got {}", base_size));
  }
  if (pool_.empty()) throw ConfigError("no training examples to batch");
  if (static_cast<std::size_t>(base_size) > pool_.size()) {
    throw ConfigError(fmt::format("batch size N = {} exceeds the {} training examples",
                                  base_size, pool_.size()));
  }
  reshuffle();
}

void BatchStream::reshuffle() {
  ++epoch_;
  order_ = pool_;
  std::mt19937_64 rng = rng_for(seed_, {kStreamEpoch, static_cast<std::uint32_t>(epoch_)});
  std::shuffle(order_.begin(), order_.end(), rng);
  cursor_ = 0;
  batch_in_epoch_ = 0;
}

AugmentedBatch BatchStream::next() {
  if (cursor_ + base_size_ > order_.size()) reshuffle();
  const int n = base_size_;
  AugmentedBatch batch;
  batch.images = ImageBatch(2 * n, ds_->image_shape);
  batch.class_labels.resize(2 * n);
  batch.domain_labels.resize(2 * n);
  batch.source_index.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    const std::size_t idx = order_[cursor_ + i];
    const LabeledExample& ex = ds_->examples[idx];
    std::mt19937_64 rng = rng_for(
        seed_, {kStreamSample, static_cast<std::uint32_t>(epoch_),
                static_cast<std::uint32_t>(batch_in_epoch_), static_cast<std::uint32_t>(i)});
    const Image first = config_.identity_first_view ? ex.image : augment(ex.image, config_, rng);
    const Image second = augment(ex.image, config_, rng);
    std::copy(first.pixels.begin(), first.pixels.end(), batch.images.image(i).begin());
    std::copy(second.pixels.begin(), second.pixels.end(), batch.images.image(i + n).begin());
    for (int row : {i, i + n}) {
      batch.class_labels[row] = ex.class_label;
      batch.domain_labels[row] = ex.domain_label;
      batch.source_index[row] = idx;
    }
  }
  cursor_ += n;
  ++batch_in_epoch_;
  return batch;
}

BatchStream make_batches(const SplitPlan& plan, const DGDataset& ds, int base_size,
                         const AugmentConfig& config, std::uint64_t seed) {
  return BatchStream(ds, resolve(plan, ds).source_train, base_size, config, seed);
}

}  // namespace cddg
