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
#include "cddg/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cddg/errors.hpp"

namespace cddg {

namespace {

using MapF = Eigen::Map<MatrixF>;
using ConstMapF = Eigen::Map<const MatrixF>;

std::size_t product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

void fill_normal(FloatBuffer& v, float stddev, std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, stddev);
  for (float& x : v) x = dist(rng);
}

void fill_uniform(FloatBuffer& v, float bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> dist(-bound, bound);
  for (float& x : v) x = dist(rng);
}

}  // namespace

Parameter::Parameter(std::string name, std::vector<int> shape)
    : name(std::move(name)),
      shape(std::move(shape)),
      value(product(this->shape), 0.0f),
      grad(product(this->shape), 0.0f) {}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }

Conv3x3::Conv3x3(const std::string& name, int in_channels, int out_channels,
                 std::mt19937_64& rng)
    : in_(in_channels),
      out_(out_channels),
      weight_(name + ".weight", {9 * in_channels, out_channels}),
      bias_(name + ".bias", {out_channels}) {
  fill_normal(weight_.value, std::sqrt(2.0f / (9.0f * in_channels)), rng);
}

ImageBatch Conv3x3::forward(const ImageBatch& x, MatrixF* columns) const {
  if (x.shape.channels != in_) {
    throw ShapeError(fmt::format("conv expects {} channels, got {}", in_,
                                 x.shape.channels));
  }
  const int h = x.shape.height, w = x.shape.width, c = in_;
  const Eigen::Index rows = static_cast<Eigen::Index>(x.count) * h * w;
  MatrixF local;
  MatrixF& cols = columns ? *columns : local;
  cols.setZero(rows, 9 * c);
  for (int n = 0; n < x.count; ++n) {
    const float* src = x.pixels.data() + static_cast<std::size_t>(n) * h * w * c;
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        float* dst = cols.row((static_cast<Eigen::Index>(n) * h + y) * w + xx).data();
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= w) continue;
            std::copy_n(src + (static_cast<std::size_t>(sy) * w + sx) * c, c,
                        dst + (ky * 3 + kx) * c);
          }
        }
      }
    }
  }
  ImageBatch out(x.count, {h, w, out_});
  MapF y(out.pixels.data(), rows, out_);
  const ConstMapF weight(weight_.value.data(), 9 * in_, out_);
  const Eigen::Map<const Eigen::RowVectorXf> bias(bias_.value.data(), out_);
  y.noalias() = cols * weight;
  y.rowwise() += bias;
  return out;
}

ImageBatch Conv3x3::backward(const ImageBatch& dy, const MatrixF& columns,
                             const ImageShape& input_shape,
                             bool need_input_grad) {
  const int h = input_shape.height, w = input_shape.width, c = in_;
  const Eigen::Index rows = static_cast<Eigen::Index>(dy.count) * h * w;
  const ConstMapF grad_out(dy.pixels.data(), rows, out_);
  MapF d_weight(weight_.grad.data(), 9 * in_, out_);
  Eigen::Map<Eigen::RowVectorXf> d_bias(bias_.grad.data(), out_);
  d_weight.noalias() += columns.transpose() * grad_out;
  d_bias += grad_out.colwise().sum();
  if (!need_input_grad) return {};

  const ConstMapF weight(weight_.value.data(), 9 * in_, out_);
  const MatrixF d_cols = grad_out * weight.transpose();
  ImageBatch dx(dy.count, input_shape);
  for (int n = 0; n < dy.count; ++n) {
    float* dst = dx.pixels.data() + static_cast<std::size_t>(n) * h * w * c;
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        const float* src =
            d_cols.row((static_cast<Eigen::Index>(n) * h + y) * w + xx).data();
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= w) continue;
            float* cell = dst + (static_cast<std::size_t>(sy) * w + sx) * c;
            const float* from = src + (ky * 3 + kx) * c;
            for (int k = 0; k < c; ++k) cell[k] += from[k];
          }
        }
      }
    }
  }
  return dx;
}

Dense::Dense(const std::string& name, int in_features, int out_features,
             std::mt19937_64& rng, Init init)
    : in_(in_features),
      out_(out_features),
      weight_(name + ".weight", {in_features, out_features}),
      bias_(name + ".bias", {out_features}) {
  switch (init) {
    case Init::kHe:
      fill_normal(weight_.value, std::sqrt(2.0f / in_features), rng);
      break;
    case Init::kXavier:
      fill_normal(weight_.value, std::sqrt(1.0f / in_features), rng);
      break;
    case Init::kUniformFanIn: {
      const float bound = 1.0f / std::sqrt(static_cast<float>(in_features));
      fill_uniform(weight_.value, bound, rng);
      fill_uniform(bias_.value, bound, rng);
      break;
    }
  }
}

MatrixF Dense::forward(const MatrixF& x) const {
  if (x.cols() != in_) {
    throw ShapeError(fmt::format("dense layer {} expects {} features, got {}",
                                 weight_.name, in_, x.cols()));
  }
  const ConstMapF weight(weight_.value.data(), in_, out_);
  const Eigen::Map<const Eigen::RowVectorXf> bias(bias_.value.data(), out_);
  MatrixF y = x * weight;
  y.rowwise() += bias;
  return y;
}

MatrixF Dense::backward(const MatrixF& x, const MatrixF& dy,
                        bool need_input_grad) {
  MapF d_weight(weight_.grad.data(), in_, out_);
  Eigen::Map<Eigen::RowVectorXf> d_bias(bias_.grad.data(), out_);
  d_weight.noalias() += x.transpose() * dy;
  d_bias += dy.colwise().sum();
  if (!need_input_grad) return {};
  const ConstMapF weight(weight_.value.data(), in_, out_);
  return dy * weight.transpose();
}

void relu_inplace(ImageBatch& x) {
  for (float& v : x.pixels) v = std::max(v, 0.0f);
}

void relu_inplace(MatrixF& x) { x = x.cwiseMax(0.0f); }

void relu_backward_inplace(std::span<float> dy, std::span<const float> y) {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(y[i] > 0.0f)) dy[i] = 0.0f;
  }
}

ImageBatch max_pool2(const ImageBatch& x, std::vector<int>* argmax) {
  const int h = x.shape.height, w = x.shape.width, c = x.shape.channels;
  const int oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0) {
    throw ShapeError("max pooling input " + to_string(x.shape) + " is too small");
  }
  ImageBatch out(x.count, {oh, ow, c});
  if (argmax) argmax->assign(out.pixels.size(), 0);
  std::size_t o = 0;
  for (int n = 0; n < x.count; ++n) {
    const std::size_t base = static_cast<std::size_t>(n) * h * w * c;
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        for (int k = 0; k < c; ++k, ++o) {
          float best = -std::numeric_limits<float>::infinity();
          int best_index = 0;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const int idx = static_cast<int>(
                  base + ((static_cast<std::size_t>(2 * y + dy) * w) + 2 * xx + dx) * c + k);
              if (x.pixels[idx] > best) {
                best = x.pixels[idx];
                best_index = idx;
              }
            }
          }
          out.pixels[o] = best;
          if (argmax) (*argmax)[o] = best_index;
        }
      }
    }
  }
  return out;
}

ImageBatch max_pool2_backward(const ImageBatch& dy, const std::vector<int>& argmax,
                              int count, const ImageShape& input_shape) {
  ImageBatch dx(count, input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) {
    dx.pixels[argmax[o]] += dy.pixels[o];
  }
  return dx;
}

MatrixF global_avg_pool(const ImageBatch& x) {
  const int hw = x.shape.height * x.shape.width;
  const int c = x.shape.channels;
  MatrixF out = MatrixF::Zero(x.count, c);
  for (int n = 0; n < x.count; ++n) {
    const ConstMapF cells(x.pixels.data() + static_cast<std::size_t>(n) * hw * c, hw, c);
    out.row(n) = cells.colwise().sum() / static_cast<float>(hw);
  }
  return out;
}

ImageBatch global_avg_pool_backward(const MatrixF& dy, int count,
                                    const ImageShape& input_shape) {
  const int hw = input_shape.height * input_shape.width;
  const int c = input_shape.channels;
  ImageBatch dx(count, input_shape);
  for (int n = 0; n < count; ++n) {
    MapF cells(dx.pixels.data() + static_cast<std::size_t>(n) * hw * c, hw, c);
    cells.rowwise() = dy.row(n) / static_cast<float>(hw);
  }
  return dx;
}

}  // namespace cddg
