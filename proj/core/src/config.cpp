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
#include "cddg/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

#include <fmt/format.h>

#include "cddg/errors.hpp"

namespace cddg {
namespace {

void require_object(const Json& j, std::string_view context) {
  if (!j.is_object()) {
    throw ConfigError(fmt::format("{} must be a JSON object, got {}", context, j.dump()));
  }
}

void reject_unknown(const Json& j, std::string_view context,
                    std::initializer_list<std::string_view> allowed) {
  require_object(j, context);
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view key : allowed) known = known || key == item.key();
    if (!known) throw ConfigError(fmt::format("unknown key '{}' in {}", item.key(), context));
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out, std::string_view context) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(fmt::format("{}.{} has the wrong type: {}", context, key,
                                  j.at(key).dump()));
  }
}

ContrastiveVariant loss_variant_for(Variant variant) {
  switch (variant) {
    case Variant::kFullComb: return ContrastiveVariant::kComb;
    case Variant::kFullInd: return ContrastiveVariant::kInd;
    default: return ContrastiveVariant::kNone;
  }
}

LossConfig loss_config_from_json(const Json& j) {
  reject_unknown(j, "loss", {"temperature", "alpha"});
  LossConfig c;
  read(j, "temperature", c.temperature, "loss");
  read(j, "alpha", c.alpha, "loss");
  return c;
}

Json to_json(const LossConfig& c) {
  return {{"temperature", c.temperature}, {"alpha", c.alpha}};
}

}  // namespace

Json to_json(const ImageShape& shape) {
  return {{"height", shape.height}, {"width", shape.width}, {"channels", shape.channels}};
}

Json to_json(const EncoderSpec& spec) {
  return {{"architecture", to_string(spec.architecture)},
          {"input", to_json(spec.input)},
          {"embedding_dim", spec.embedding_dim},
          {"widths", spec.widths},
          {"projection_head", spec.projection_head}};
}

Json to_json(const AugmentConfig& c) {
  return {{"enabled", c.enabled},
          {"identity_first_view", c.identity_first_view},
          {"crop_scale_min", c.crop_scale_min},
          {"crop_ratio_min", c.crop_ratio_min},
          {"crop_ratio_max", c.crop_ratio_max},
          {"flip_probability", c.flip_probability},
          {"jitter_probability", c.jitter_probability},
          {"brightness", c.brightness},
          {"contrast", c.contrast},
          {"saturation", c.saturation},
          {"grayscale_probability", c.grayscale_probability}};
}

Json to_json(const SyntheticSpec& s) {
  return {{"num_classes", s.num_classes}, {"num_domains", s.num_domains},
          {"n_per_cell", s.n_per_cell},   {"image_size", s.image_size},
          {"nuisance_strength", s.nuisance_strength}, {"seed", s.seed}};
}

Json to_json(const TrainConfig& c) {
  return {{"loss", to_json(c.loss)},
          {"encoder", to_json(c.encoder)},
          {"augmentation", to_json(c.augmentation)},
          {"variant", to_string(c.variant)},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"eval_every", c.eval_every},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed}};
}

Json to_json(const ProbeConfig& c) {
  return {{"iterations", c.iterations}, {"learning_rate", c.learning_rate}, {"l2", c.l2}};
}

EncoderSpec encoder_spec_from_json(const Json& j) {
  reject_unknown(j, "encoder",
                 {"architecture", "input", "embedding_dim", "widths", "projection_head"});
  EncoderSpec s;
  std::string arch = to_string(s.architecture);
  read(j, "architecture", arch, "encoder");
  s.architecture = architecture_from_string(arch);
  if (j.contains("input")) {
    const Json& in = j.at("input");
    reject_unknown(in, "encoder.input", {"height", "width", "channels"});
    read(in, "height", s.input.height, "encoder.input");
    read(in, "width", s.input.width, "encoder.input");
    read(in, "channels", s.input.channels, "encoder.input");
  }
  read(j, "embedding_dim", s.embedding_dim, "encoder");
  read(j, "widths", s.widths, "encoder");
  read(j, "projection_head", s.projection_head, "encoder");
  return s;
}

AugmentConfig augment_config_from_json(const Json& j) {
  reject_unknown(j, "augmentation",
                 {"enabled", "identity_first_view", "crop_scale_min", "crop_ratio_min",
                  "crop_ratio_max", "flip_probability", "jitter_probability", "brightness",
                  "contrast", "saturation", "grayscale_probability"});
  AugmentConfig c;
  read(j, "enabled", c.enabled, "augmentation");
  read(j, "identity_first_view", c.identity_first_view, "augmentation");
  read(j, "crop_scale_min", c.crop_scale_min, "augmentation");
  read(j, "crop_ratio_min", c.crop_ratio_min, "augmentation");
  read(j, "crop_ratio_max", c.crop_ratio_max, "augmentation");
  read(j, "flip_probability", c.flip_probability, "augmentation");
  read(j, "jitter_probability", c.jitter_probability, "augmentation");
  read(j, "brightness", c.brightness, "augmentation");
  read(j, "contrast", c.contrast, "augmentation");
  read(j, "saturation", c.saturation, "augmentation");
  read(j, "grayscale_probability", c.grayscale_probability, "augmentation");
  return c;
}

SyntheticSpec synthetic_spec_from_json(const Json& j) {
  reject_unknown(j, "synthetic", {"num_classes", "num_domains", "n_per_cell", "image_size",
                                  "nuisance_strength", "seed"});
  SyntheticSpec s;
  read(j, "num_classes", s.num_classes, "synthetic");
  read(j, "num_domains", s.num_domains, "synthetic");
  read(j, "n_per_cell", s.n_per_cell, "synthetic");
  read(j, "image_size", s.image_size, "synthetic");
  read(j, "nuisance_strength", s.nuisance_strength, "synthetic");
  read(j, "seed", s.seed, "synthetic");
  return s;
}

TrainConfig train_config_from_json(const Json& j) {
  reject_unknown(j, "train config",
                 {"loss", "encoder", "augmentation", "variant", "batch_size", "steps",
                  "eval_every", "learning_rate", "weight_decay", "seed"});
  TrainConfig c;
  if (j.contains("loss")) c.loss = loss_config_from_json(j.at("loss"));
  if (j.contains("encoder")) c.encoder = encoder_spec_from_json(j.at("encoder"));
  if (j.contains("augmentation")) c.augmentation = augment_config_from_json(j.at("augmentation"));
  std::string variant = to_string(c.variant);
  read(j, "variant", variant, "train");
  c.variant = variant_from_string(variant);
  c.loss.variant = loss_variant_for(c.variant);
  read(j, "batch_size", c.batch_size, "train");
  read(j, "steps", c.steps, "train");
  read(j, "eval_every", c.eval_every, "train");
  read(j, "learning_rate", c.learning_rate, "train");
  read(j, "weight_decay", c.weight_decay, "train");
  read(j, "seed", c.seed, "train");
  return c;
}

ProbeConfig probe_config_from_json(const Json& j) {
  reject_unknown(j, "probe", {"iterations", "learning_rate", "l2"});
  ProbeConfig c;
  read(j, "iterations", c.iterations, "probe");
  read(j, "learning_rate", c.learning_rate, "probe");
  read(j, "l2", c.l2, "probe");
  return c;
}

void RunConfig::validate() const {
  if (dataset.kind == DatasetSource::Kind::kSynthetic) {
    synthetic.validate();
  } else if (dataset.root.empty()) {
    throw ConfigError("dataset.root is required for directory datasets");
  }
  if (dataset.image_size < 1) throw ConfigError("dataset.image_size must be positive");
  train.validate();
  probe.validate();
  if (seeds.empty()) throw ConfigError("benchmark.seeds must not be empty");
  if (workers < 1) throw ConfigError("benchmark.workers must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig run_config_from_json(const Json& j) {
  reject_unknown(j, "config", {"output_dir", "dataset", "synthetic", "encoder", "loss", "train",
                               "augmentation", "benchmark", "probe"});
  RunConfig c;
  read(j, "output_dir", c.output_dir, "config");

  if (j.contains("dataset")) {
    const Json& d = j.at("dataset");
    reject_unknown(d, "dataset", {"source", "root", "image_size"});
    std::string source = "synthetic";
    read(d, "source", source, "dataset");
    if (source == "synthetic") {
      c.dataset.kind = DatasetSource::Kind::kSynthetic;
    } else if (source == "directory") {
      c.dataset.kind = DatasetSource::Kind::kDirectory;
    } else {
      throw ConfigError("dataset.source must be 'synthetic' or 'directory', got '" + source + "'");
    }
    read(d, "root", c.dataset.root, "dataset");
    read(d, "image_size", c.dataset.image_size, "dataset");
  }
  if (j.contains("synthetic")) {
    c.synthetic = synthetic_spec_from_json(j.at("synthetic"));
    if (j.at("synthetic").contains("image_size") &&
        !(j.contains("dataset") && j.at("dataset").contains("image_size"))) {
      c.dataset.image_size = c.synthetic.image_size;
    }
  }
  c.synthetic.image_size = c.dataset.image_size;

  Json train = Json::object();
  if (j.contains("train")) {
    require_object(j.at("train"), "train");
    train = j.at("train");
    if (train.contains("target")) {
      read(train, "target", c.target, "train");
      train.erase("target");
    }
    for (const char* nested : {"loss", "encoder", "augmentation"}) {
      if (train.contains(nested)) {
        throw ConfigError(fmt::format("unknown key '{}' in train (it belongs at the top level)",
                                      nested));
      }
    }
  }
  for (const char* nested : {"loss", "encoder", "augmentation"}) {
    if (j.contains(nested)) train[nested] = j.at(nested);
  }
  c.train = train_config_from_json(train);

  if (j.contains("benchmark")) {
    const Json& b = j.at("benchmark");
    reject_unknown(b, "benchmark", {"seeds", "workers"});
    read(b, "seeds", c.seeds, "benchmark");
    read(b, "workers", c.workers, "benchmark");
  }
  if (j.contains("probe")) c.probe = probe_config_from_json(j.at("probe"));
  return c;
}

Json to_json(const RunConfig& c) {
  Json train = {{"variant", to_string(c.train.variant)},
                {"batch_size", c.train.batch_size},
                {"steps", c.train.steps},
                {"eval_every", c.train.eval_every},
                {"learning_rate", c.train.learning_rate},
                {"weight_decay", c.train.weight_decay},
                {"seed", c.train.seed},
                {"target", c.target}};
  Json synthetic = to_json(c.synthetic);
  synthetic.erase("image_size");
  return {{"output_dir", c.output_dir},
          {"dataset",
           {{"source", c.dataset.kind == DatasetSource::Kind::kSynthetic ? "synthetic"
                                                                         : "directory"},
            {"root", c.dataset.root},
            {"image_size", c.dataset.image_size}}},
          {"synthetic", synthetic},
          {"encoder", to_json(c.train.encoder)},
          {"loss", to_json(c.train.loss)},
          {"train", train},
          {"augmentation", to_json(c.train.augmentation)},
          {"benchmark", {{"seeds", c.seeds}, {"workers", c.workers}}},
          {"probe", to_json(c.probe)}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

DGDataset materialize_dataset(RunConfig& config) {
  DGDataset ds;
  if (config.dataset.kind == DatasetSource::Kind::kSynthetic) {
    config.synthetic.image_size = config.dataset.image_size;
    ds = generate_synthetic(config.synthetic);
  } else {
    ds = load_directory(config.dataset.root, config.dataset.image_size);
  }
  config.train.encoder.input = ds.image_shape;
  return ds;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cddg
