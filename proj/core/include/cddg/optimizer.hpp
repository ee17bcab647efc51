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
#ifndef CDDG_OPTIMIZER_HPP_
#define CDDG_OPTIMIZER_HPP_

#include <vector>

#include "cddg/layers.hpp"

namespace cddg {

// Adam with decoupled weight decay. State is keyed by parameter position, so
// the same parameter list must be passed to every step().
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  explicit AdamW(Options options) : options_(options) {}

  // Applies one update from the accumulated gradients, then zeroes them.
  void step(const std::vector<Parameter*>& params);

  long steps_taken() const { return t_; }

 private:
  Options options_;
  long t_ = 0;
  std::vector<FloatBuffer> m_;
  std::vector<FloatBuffer> v_;
};

}  // namespace cddg

#endif  // CDDG_OPTIMIZER_HPP_
