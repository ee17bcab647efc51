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
#include "cddg/optimizer.hpp"

#include <cmath>

#include "cddg/errors.hpp"

namespace cddg {

void AdamW::step(const std::vector<Parameter*>& params) {
  if (m_.empty()) {
    for (const Parameter* p : params) {
      m_.emplace_back(p->size(), 0.0f);
      v_.emplace_back(p->size(), 0.0f);
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeError("optimizer received a different parameter list");
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const float step_size = static_cast<float>(options_.learning_rate / correction1);
  const float decay = static_cast<float>(options_.learning_rate * options_.weight_decay);
  const float inv_sqrt_c2 = static_cast<float>(1.0 / std::sqrt(correction2));
  const float eps = static_cast<float>(options_.epsilon);
  const float fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    FloatBuffer& m = m_[k];
    FloatBuffer& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const float g = p.grad[i];
      m[i] = fb1 * m[i] + (1.0f - fb1) * g;
      v[i] = fb2 * v[i] + (1.0f - fb2) * g * g;
      if (decay != 0.0f) p.value[i] -= decay * p.value[i];
      p.value[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + eps);
      p.grad[i] = 0.0f;
    }
  }
}

}  // namespace cddg
