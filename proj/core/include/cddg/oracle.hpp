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
#ifndef CDDG_ORACLE_HPP_
#define CDDG_ORACLE_HPP_

#include <span>

#include "cddg/core.hpp"

// Brute-force reference values for the contrastive losses. Everything here
// is written as explicit loops over anchors, positives, and denominator
// terms and shares no code with losses.cpp.
namespace cddg::oracle {

double oracle_scl(const Matrix& z, std::span<const int> labels,
                  double temperature);

double oracle_dscl_comb(const DualEmbeddings& d, int num_classes,
                        double temperature);

double oracle_dscl_ind(const DualEmbeddings& d, double temperature);

}  // namespace cddg::oracle

#endif  // CDDG_ORACLE_HPP_
