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
#ifndef CDDG_LAYERS_HPP_
#define CDDG_LAYERS_HPP_

#include <random>
#include <string>
#include <vector>

#include "cddg/core.hpp"

namespace cddg {

// A trainable tensor and its accumulated gradient.
struct Parameter {
  std::string name;
  std::vector<int> shape;
  FloatBuffer value;
  FloatBuffer grad;

  Parameter() = default;
  Parameter(std::string name, std::vector<int> shape);

  std::size_t size() const { return value.size(); }
  void zero_grad();
};

// 3x3 convolution, stride 1, zero padding 1, NHWC.
class Conv3x3 {
 public:
  Conv3x3() = default;
  Conv3x3(const std::string& name, int in_channels, int out_channels,
          std::mt19937_64& rng);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

  // columns (may be null) receives the im2col matrix needed by backward().
  ImageBatch forward(const ImageBatch& x, MatrixF* columns) const;

  // Accumulates parameter gradients; returns dLoss/dx unless
  // need_input_grad is false (then an empty batch).
  ImageBatch backward(const ImageBatch& dy, const MatrixF& columns,
                      const ImageShape& input_shape, bool need_input_grad);

  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }
  std::vector<const Parameter*> parameters() const { return {&weight_, &bias_}; }

 private:
  int in_ = 0;
  int out_ = 0;
  Parameter weight_;  // [9 * in, out]
  Parameter bias_;    // [out]
};

// Fully connected layer y = x W + b.
class Dense {
 public:
  enum class Init { kHe, kXavier, kUniformFanIn };

  Dense() = default;
  Dense(const std::string& name, int in_features, int out_features,
        std::mt19937_64& rng, Init init);

  int in_features() const { return in_; }
  int out_features() const { return out_; }

  MatrixF forward(const MatrixF& x) const;
  MatrixF backward(const MatrixF& x, const MatrixF& dy, bool need_input_grad);

  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }
  std::vector<const Parameter*> parameters() const { return {&weight_, &bias_}; }

 private:
  int in_ = 0;
  int out_ = 0;
  Parameter weight_;  // [in, out]
  Parameter bias_;    // [out]
};

void relu_inplace(ImageBatch& x);
void relu_inplace(MatrixF& x);
// Zeroes dy wherever the post-activation output y is not positive.
void relu_backward_inplace(std::span<float> dy, std::span<const float> y);

// 2x2 max pooling with floor semantics. argmax receives, per output cell,
// the flat input index that won.
ImageBatch max_pool2(const ImageBatch& x, std::vector<int>* argmax);
ImageBatch max_pool2_backward(const ImageBatch& dy, const std::vector<int>& argmax,
                              int count, const ImageShape& input_shape);

// Mean over H and W: [N, H, W, C] -> [N, C].
MatrixF global_avg_pool(const ImageBatch& x);
ImageBatch global_avg_pool_backward(const MatrixF& dy, int count,
                                    const ImageShape& input_shape);

}  // namespace cddg

#endif  // CDDG_LAYERS_HPP_
