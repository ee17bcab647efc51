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
#include "cddg/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "cddg/config.hpp"
#include "cddg/errors.hpp"

namespace cddg {
namespace {

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated checkpoint: " + path.string());
  return value;
}

Json manifest_for(const ModelBundle& bundle, const CheckpointMeta& meta) {
  Json params = Json::array();
  for (const Parameter* p : bundle.parameters()) {
    params.push_back({{"name", p->name}, {"shape", p->shape}, {"size", p->size()}});
  }
  return {{"format", "cddg-checkpoint"},
          {"config_hash", meta.config_hash},
          {"checkpoint_id", meta.checkpoint_id},
          {"step", meta.step},
          {"metrics", meta.metrics},
          {"encoder", to_json(bundle.spec)},
          {"num_classes", bundle.space.num_classes()},
          {"num_domains", bundle.space.num_domains()},
          {"parameters", params}};
}

}  // namespace

void save_checkpoint(const ModelBundle& bundle, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string manifest = manifest_for(bundle, meta).dump();
  std::uint64_t payload_floats = 0;
  for (const Parameter* p : bundle.parameters()) payload_floats += p->size();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<std::uint64_t>(manifest.size()));
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    write_pod(out, payload_floats);
    for (const Parameter* p : bundle.parameters()) {
      out.write(reinterpret_cast<const char*>(p->value.data()),
                static_cast<std::streamsize>(p->size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const CheckpointExpectation& expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError("not a checkpoint file: " + path.string());
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw VersionError(fmt::format("checkpoint format version {} is not supported (expected {})",
                                   version, kCheckpointVersion));
  }
  const auto manifest_len = read_pod<std::uint64_t>(in, path);
  std::string manifest_text(manifest_len, '\0');
  in.read(manifest_text.data(), static_cast<std::streamsize>(manifest_len));
  if (!in) throw IoError("truncated checkpoint manifest: " + path.string());
  Json manifest;
  try {
    manifest = Json::parse(manifest_text);
  } catch (const Json::exception& e) {
    throw IoError("corrupt checkpoint manifest in " + path.string() + ": " + e.what());
  }

  LoadedCheckpoint loaded;
  loaded.meta.config_hash = manifest.at("config_hash").get<std::string>();
  loaded.meta.checkpoint_id = manifest.at("checkpoint_id").get<std::string>();
  loaded.meta.step = manifest.at("step").get<int>();
  loaded.meta.metrics = manifest.at("metrics");

  if (expect.config_hash && *expect.config_hash != loaded.meta.config_hash) {
    throw VersionError("checkpoint " + path.string() + " was written for config " +
                       loaded.meta.config_hash + ", expected " + *expect.config_hash);
  }
  const EncoderSpec spec = encoder_spec_from_json(manifest.at("encoder"));
  if (expect.encoder && !(*expect.encoder == spec)) {
    throw ConfigError("checkpoint encoder " + to_json(spec).dump() +
                      " does not match requested " + to_json(*expect.encoder).dump());
  }
  const LabelSpace space(manifest.at("num_classes").get<int>(),
                         manifest.at("num_domains").get<int>());
  loaded.bundle = init_bundle(spec, space, 0);

  const auto payload_floats = read_pod<std::uint64_t>(in, path);
  const Json& listed = manifest.at("parameters");
  std::vector<Parameter*> params = loaded.bundle.parameters();
  if (listed.size() != params.size()) {
    throw IoError(fmt::format("checkpoint lists {} tensors, model has {}", listed.size(),
                              params.size()));
  }
  std::uint64_t expected_floats = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (listed[i].at("name").get<std::string>() != params[i]->name ||
        listed[i].at("shape").get<std::vector<int>>() != params[i]->shape) {
      throw IoError("checkpoint tensor " + listed[i].dump() + " does not match model tensor " +
                    params[i]->name);
    }
    expected_floats += params[i]->size();
  }
  if (payload_floats != expected_floats) {
    throw IoError(fmt::format("checkpoint payload has {} values, expected {}", payload_floats,
                              expected_floats));
  }
  for (Parameter* p : params) {
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->size() * sizeof(float)));
    if (!in) throw IoError("truncated checkpoint payload: " + path.string());
    p->zero_grad();
  }
  return loaded;
}

std::string parameter_digest(const ModelBundle& bundle) {
  std::string bytes;
  for (const Parameter* p : bundle.parameters()) {
    bytes.append(p->name);
    bytes.append(reinterpret_cast<const char*>(p->value.data()), p->size() * sizeof(float));
  }
  return fnv1a_hex(bytes);
}

}  // namespace cddg
