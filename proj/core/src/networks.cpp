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
#include "cddg/networks.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cddg/errors.hpp"

namespace cddg {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kStreamClassEncoder = 11;
constexpr std::uint32_t kStreamDomainEncoder = 23;
constexpr std::uint32_t kStreamClassHead = 37;
constexpr std::uint32_t kStreamDomainHead = 41;

}  // namespace

std::string to_string(Architecture architecture) {
  return architecture == Architecture::kSmallCnn ? "small_cnn" : "mlp";
}

Architecture architecture_from_string(const std::string& name) {
  if (name == "small_cnn") return Architecture::kSmallCnn;
  if (name == "mlp") return Architecture::kMlp;
  throw ConfigError("unknown encoder architecture '" + name + "'");
}

std::string to_string(Branch branch) {
  return branch == Branch::kClass ? "g_v" : "g_s";
}

void EncoderSpec::validate() const {
  if (embedding_dim < 2) {
    throw ConfigError(fmt::format("embedding_dim must be >= 2, got {}", embedding_dim));
  }
  if (input.height < 1 || input.width < 1 || input.channels < 1) {
    throw ConfigError("encoder input shape " + to_string(input) + " is empty");
  }
  for (int w : widths) {
    if (w < 1) throw ConfigError(fmt::format("encoder width {} is not positive", w));
  }
  if (architecture == Architecture::kSmallCnn) {
    if (widths.empty()) throw ConfigError("small_cnn needs at least one conv block");
    if ((input.height >> widths.size()) < 1 || (input.width >> widths.size()) < 1) {
      throw ConfigError(fmt::format("{} conv blocks cannot pool a {} input",
                                    widths.size(), to_string(input)));
    }
  }
}

Encoder::Encoder(const std::string& name, const EncoderSpec& spec,
                 std::uint64_t seed, std::uint32_t stream)
    : spec_(spec) {
  spec.validate();
  std::mt19937_64 rng = make_rng(seed, stream);
  int features = 0;
  if (spec.architecture == Architecture::kSmallCnn) {
    int channels = spec.input.channels;
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
      convs_.emplace_back(fmt::format("{}.conv{}", name, i), channels,
                          spec.widths[i], rng);
      channels = spec.widths[i];
    }
    features = channels;
  } else {
    features = static_cast<int>(spec.input.size());
    for (std::size_t i = 0; i < spec.widths.size(); ++i) {
      dense_.emplace_back(fmt::format("{}.hidden{}", name, i), features,
                          spec.widths[i], rng, Dense::Init::kHe);
      features = spec.widths[i];
    }
  }
  const int d = spec.embedding_dim;
  if (spec.projection_head) {
    dense_.emplace_back(name + ".proj", features, d, rng, Dense::Init::kHe);
    dense_.emplace_back(name + ".head0", d, d, rng, Dense::Init::kHe);
    dense_.emplace_back(name + ".head1", d, d, rng, Dense::Init::kXavier);
  } else {
    dense_.emplace_back(name + ".proj", features, d, rng, Dense::Init::kXavier);
  }
}

MatrixF Encoder::forward(const ImageBatch& images, EncoderTape* tape) const {
  if (images.shape != spec_.input) {
    throw ShapeError("encoder expects " + to_string(spec_.input) +
                     " images, got " + to_string(images.shape));
  }
  if (tape) *tape = EncoderTape{};
  if (tape) tape->count = images.count;

  MatrixF h;
  if (spec_.architecture == Architecture::kSmallCnn) {
    ImageBatch x = images;
    for (const Conv3x3& conv : convs_) {
      MatrixF* cols = nullptr;
      if (tape) {
        tape->conv_inputs.push_back(x.shape);
        cols = &tape->columns.emplace_back();
      }
      ImageBatch y = conv.forward(x, cols);
      relu_inplace(y);
      std::vector<int>* argmax = tape ? &tape->pool_argmax.emplace_back() : nullptr;
      x = max_pool2(y, argmax);
      if (tape) tape->conv_outputs.push_back(std::move(y));
    }
    if (tape) tape->trunk_output = x.shape;
    h = global_avg_pool(x);
  } else {
    h = Eigen::Map<const MatrixF>(images.pixels.data(), images.count,
                                  static_cast<Eigen::Index>(images.shape.size()));
  }

  for (std::size_t i = 0; i < dense_.size(); ++i) {
    if (tape) tape->dense_inputs.push_back(h);
    h = dense_[i].forward(h);
    if (i + 1 < dense_.size()) relu_inplace(h);
  }
  return h;
}

void Encoder::backward(const MatrixF& d_features, const EncoderTape& tape) {
  MatrixF d = d_features;
  for (std::size_t i = dense_.size(); i-- > 0;) {
    const bool need_input = i > 0 || spec_.architecture == Architecture::kSmallCnn;
    d = dense_[i].backward(tape.dense_inputs[i], d, need_input);
    if (i > 0) {
      // tape.dense_inputs[i] is the ReLU output feeding layer i.
      relu_backward_inplace({d.data(), static_cast<std::size_t>(d.size())},
                            {tape.dense_inputs[i].data(),
                             static_cast<std::size_t>(tape.dense_inputs[i].size())});
    }
  }
  if (spec_.architecture != Architecture::kSmallCnn) return;

  ImageBatch dx = global_avg_pool_backward(d, tape.count, tape.trunk_output);
  for (std::size_t i = convs_.size(); i-- > 0;) {
    const ImageBatch& y = tape.conv_outputs[i];
    ImageBatch dy = max_pool2_backward(dx, tape.pool_argmax[i], tape.count, y.shape);
    relu_backward_inplace(dy.pixels, y.pixels);
    dx = convs_[i].backward(dy, tape.columns[i], tape.conv_inputs[i], i > 0);
  }
}

std::vector<Parameter*> Encoder::parameters() {
  std::vector<Parameter*> out;
  for (auto& c : convs_) for (auto* p : c.parameters()) out.push_back(p);
  for (auto& l : dense_) for (auto* p : l.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> Encoder::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& c : convs_) for (const auto* p : c.parameters()) out.push_back(p);
  for (const auto& l : dense_) for (const auto* p : l.parameters()) out.push_back(p);
  return out;
}

std::vector<Parameter*> ModelBundle::parameters() {
  std::vector<Parameter*> out = g_v.parameters();
  for (auto* p : g_s.parameters()) out.push_back(p);
  for (auto* p : f_v.parameters()) out.push_back(p);
  for (auto* p : f_s.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> ModelBundle::parameters() const {
  std::vector<const Parameter*> out = g_v.parameters();
  for (const auto* p : g_s.parameters()) out.push_back(p);
  for (const auto* p : f_v.parameters()) out.push_back(p);
  for (const auto* p : f_s.parameters()) out.push_back(p);
  return out;
}

ModelBundle init_bundle(const EncoderSpec& spec, const LabelSpace& space,
                        std::uint64_t seed) {
  spec.validate();
  ModelBundle bundle;
  bundle.spec = spec;
  bundle.space = space;
  bundle.g_v = Encoder("g_v", spec, seed, kStreamClassEncoder);
  bundle.g_s = Encoder("g_s", spec, seed, kStreamDomainEncoder);
  std::mt19937_64 rng_v = make_rng(seed, kStreamClassHead);
  std::mt19937_64 rng_s = make_rng(seed, kStreamDomainHead);
  bundle.f_v = Dense("f_v", spec.embedding_dim, space.num_classes(), rng_v,
                     Dense::Init::kUniformFanIn);
  bundle.f_s = Dense("f_s", spec.embedding_dim, space.num_domains(), rng_s,
                     Dense::Init::kUniformFanIn);
  return bundle;
}

NormalizedFeatures normalize_features(const MatrixF& features) {
  NormalizedFeatures out;
  out.z = features.cast<double>();
  out.norms.resize(out.z.rows());
  for (Eigen::Index i = 0; i < out.z.rows(); ++i) {
    const double norm = std::max(out.z.row(i).norm(), 1e-12);
    out.norms[i] = norm;
    out.z.row(i) /= norm;
  }
  return out;
}

MatrixF normalize_backward(const NormalizedFeatures& normalized, const Matrix& d_z) {
  const Matrix& z = normalized.z;
  Matrix d = d_z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double proj = z.row(i).dot(d_z.row(i));
    d.row(i) = (d_z.row(i) - proj * z.row(i)) / normalized.norms[i];
  }
  return d.cast<float>();
}

Matrix encode_branch(const ModelBundle& bundle, Branch branch,
                     const ImageBatch& images) {
  const Encoder& encoder = branch == Branch::kClass ? bundle.g_v : bundle.g_s;
  return normalize_features(encoder.forward(images)).z;
}

DualEmbeddings encode(const ModelBundle& bundle, const ImageBatch& images) {
  DualEmbeddings d;
  d.z_v = encode_branch(bundle, Branch::kClass, images);
  d.z_s = encode_branch(bundle, Branch::kDomain, images);
  return d;
}

Matrix apply_classifier(const Dense& head, const Matrix& z) {
  return head.forward(z.cast<float>()).cast<double>();
}

Logits classify(const ModelBundle& bundle, const DualEmbeddings& d) {
  if (d.z_v.cols() != bundle.spec.embedding_dim ||
      d.z_s.cols() != bundle.spec.embedding_dim) {
    throw ShapeError(fmt::format("classifiers expect {}-dim embeddings, got {} and {}",
                                 bundle.spec.embedding_dim, d.z_v.cols(), d.z_s.cols()));
  }
  return {apply_classifier(bundle.f_v, d.z_v), apply_classifier(bundle.f_s, d.z_s)};
}

int argmax_row(const Matrix& m, Eigen::Index row) {
  int best = 0;
  for (Eigen::Index k = 1; k < m.cols(); ++k) {
    if (m(row, k) > m(row, best)) best = static_cast<int>(k);
  }
  return best;
}

}  // namespace cddg
