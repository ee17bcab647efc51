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
#ifndef CDDG_NETWORKS_HPP_
#define CDDG_NETWORKS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cddg/core.hpp"
#include "cddg/layers.hpp"

namespace cddg {

enum class Architecture { kSmallCnn, kMlp };

std::string to_string(Architecture architecture);
Architecture architecture_from_string(const std::string& name);

struct EncoderSpec {
  Architecture architecture = Architecture::kSmallCnn;
  ImageShape input{32, 32, 3};
  int embedding_dim = 128;
  // Conv block widths for kSmallCnn, hidden layer widths for kMlp.
  std::vector<int> widths{32, 64, 128};
  // Optional 2-layer head between the encoder output and the embedding.
  bool projection_head = false;

  void validate() const;
  friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

// Activations recorded by Encoder::forward for the backward pass.
struct EncoderTape {
  std::vector<ImageShape> conv_inputs;
  std::vector<MatrixF> columns;
  std::vector<ImageBatch> conv_outputs;  // after ReLU, before pooling
  std::vector<std::vector<int>> pool_argmax;
  ImageShape trunk_output;
  std::vector<MatrixF> dense_inputs;
  int count = 0;
};

// One feature extractor: conv trunk (or MLP) followed by a dense projection
// to embedding_dim. Output is the pre-normalization feature.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const std::string& name, const EncoderSpec& spec, std::uint64_t seed,
          std::uint32_t stream);

  const EncoderSpec& spec() const { return spec_; }

  MatrixF forward(const ImageBatch& images, EncoderTape* tape = nullptr) const;
  void backward(const MatrixF& d_features, const EncoderTape& tape);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  EncoderSpec spec_;
  std::vector<Conv3x3> convs_;
  std::vector<Dense> dense_;
};

// g_v/f_v classify categories; g_s/f_s classify (generated) domains.
struct ModelBundle {
  EncoderSpec spec;
  LabelSpace space{1, 1};
  Encoder g_v;
  Encoder g_s;
  Dense f_v;
  Dense f_s;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
};

// Deterministic in (spec, space, seed). g_v and g_s draw from different
// random streams and never share parameters.
ModelBundle init_bundle(const EncoderSpec& spec, const LabelSpace& space,
                        std::uint64_t seed);

enum class Branch { kClass, kDomain };

std::string to_string(Branch branch);

struct NormalizedFeatures {
  Matrix z;
  std::vector<double> norms;
};

NormalizedFeatures normalize_features(const MatrixF& features);
// dLoss/dfeatures given dLoss/dz for z = features / ‖features‖.
MatrixF normalize_backward(const NormalizedFeatures& normalized, const Matrix& d_z);

// Unit-norm embeddings from both branches. Labels are left empty.
DualEmbeddings encode(const ModelBundle& bundle, const ImageBatch& images);
Matrix encode_branch(const ModelBundle& bundle, Branch branch,
                     const ImageBatch& images);

struct Logits {
  Matrix class_logits;
  Matrix domain_logits;
};

// f_v reads only z_v, f_s reads only z_s.
Logits classify(const ModelBundle& bundle, const DualEmbeddings& d);
Matrix apply_classifier(const Dense& head, const Matrix& z);

// Index of the largest entry; ties go to the lowest index.
int argmax_row(const Matrix& m, Eigen::Index row);

}  // namespace cddg

#endif  // CDDG_NETWORKS_HPP_
