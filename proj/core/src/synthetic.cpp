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
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "cddg/dataset.hpp"
#include "cddg/errors.hpp"

namespace cddg {

namespace {

enum class Glyph { kCircle, kSquare, kTriangle, kCross, kRing, kDiamond, kBar, kX };

constexpr std::array<const char*, kMaxSyntheticClasses> kGlyphNames = {
    "circle", "square", "triangle", "cross", "ring", "diamond", "bar", "x"};

enum class Texture { kStripesH, kStripesV, kChecker, kDiagonal, kSpeckle };
constexpr int kTextureKinds = 5;

struct DomainStyle {
  std::array<double, 3> background;
  std::array<double, 3> foreground;
  Texture texture;
  int period;
  double texture_amplitude;
  double noise_sigma;
};

struct Geometry {
  double cx, cy, radius, angle;
};

constexpr std::array<double, 3> kNeutralBackground = {0.5, 0.5, 0.5};
constexpr std::array<double, 3> kNeutralForeground = {1.0, 1.0, 1.0};

// Stream tags keep the geometry, style and noise draws independent.
constexpr std::uint32_t kStreamGeometry = 0x9E0;
constexpr std::uint32_t kStreamStyle = 0x57F;
constexpr std::uint32_t kStreamNoise = 0x51E;
constexpr std::uint32_t kStreamTextures = 0x7E4;

std::mt19937_64 rng_for(std::uint64_t seed, std::initializer_list<std::uint32_t> tags) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  words.insert(words.end(), tags);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

double luminance(const std::array<double, 3>& rgb) {
  return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

bool inside(Glyph glyph, double u, double v) {
  switch (glyph) {
    case Glyph::kCircle: return u * u + v * v <= 1.0;
    case Glyph::kSquare: return std::abs(u) <= 0.8 && std::abs(v) <= 0.8;
    case Glyph::kTriangle:
      return v <= 0.7 && v >= -0.9 && std::abs(u) <= 0.9 * (v + 0.9) / 1.6;
    case Glyph::kCross:
      return (std::abs(u) <= 0.3 && std::abs(v) <= 0.95) ||
             (std::abs(v) <= 0.3 && std::abs(u) <= 0.95);
    case Glyph::kRing: {
      const double r2 = u * u + v * v;
      return r2 <= 1.0 && r2 >= 0.55 * 0.55;
    }
    case Glyph::kDiamond: return std::abs(u) + std::abs(v) <= 1.0;
    case Glyph::kBar: return std::abs(u) <= 0.95 && std::abs(v) <= 0.3;
    case Glyph::kX: {
      const double a = (u + v) * M_SQRT1_2, b = (u - v) * M_SQRT1_2;
      return (std::abs(a) <= 0.25 && std::abs(b) <= 1.0) ||
             (std::abs(b) <= 0.25 && std::abs(a) <= 1.0);
    }
  }
  return false;
}

double texture_value(Texture texture, int period, int y, int x) {
  switch (texture) {
    case Texture::kStripesH: return ((y / period) % 2) ? 1.0 : -1.0;
    case Texture::kStripesV: return ((x / period) % 2) ? 1.0 : -1.0;
    case Texture::kChecker: return (((y / period) + (x / period)) % 2) ? 1.0 : -1.0;
    case Texture::kDiagonal: return (((x + y) / period) % 2) ? 1.0 : -1.0;
    case Texture::kSpeckle: return 0.0;  // handled by the speckle map
  }
  return 0.0;
}

std::vector<DomainStyle> draw_styles(const SyntheticSpec& spec) {
  std::vector<int> kinds(kTextureKinds);
  std::iota(kinds.begin(), kinds.end(), 0);
  std::mt19937_64 kind_rng = rng_for(spec.seed, {kStreamTextures});
  std::shuffle(kinds.begin(), kinds.end(), kind_rng);

  std::vector<DomainStyle> styles;
  for (int d = 0; d < spec.num_domains; ++d) {
    std::mt19937_64 rng = rng_for(spec.seed, {kStreamStyle, static_cast<std::uint32_t>(d)});
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    DomainStyle style;
    for (double& c : style.background) c = unit(rng);
    for (int attempt = 0; attempt < 256; ++attempt) {
      for (double& c : style.foreground) c = unit(rng);
      if (std::abs(luminance(style.foreground) - luminance(style.background)) >= 0.35) break;
    }
    style.texture = static_cast<Texture>(kinds[d % kTextureKinds]);
    style.period = std::uniform_int_distribution<int>(2, 4)(rng);
    style.texture_amplitude = std::uniform_real_distribution<double>(0.12, 0.25)(rng);
    style.noise_sigma = std::uniform_real_distribution<double>(0.02, 0.08)(rng);
    styles.push_back(style);
  }
  return styles;
}

Image render(const SyntheticSpec& spec, Glyph glyph, const Geometry& g,
             const DomainStyle& style, std::mt19937_64& noise_rng) {
  const int size = spec.image_size;
  const double s = spec.nuisance_strength;
  std::array<double, 3> bg, fg;
  for (int c = 0; c < 3; ++c) {
    bg[c] = (1.0 - s) * kNeutralBackground[c] + s * style.background[c];
    fg[c] = (1.0 - s) * kNeutralForeground[c] + s * style.foreground[c];
  }
  const double amplitude = s * style.texture_amplitude;
  const double sigma = s * style.noise_sigma;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Image img{{size, size, 3}, FloatBuffer(static_cast<std::size_t>(size) * size * 3)};
  const double cos_a = std::cos(g.angle), sin_a = std::sin(g.angle);
  constexpr int kSub = 3;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double py = (y + (sy + 0.5) / kSub) / size - g.cy;
          const double px = (x + (sx + 0.5) / kSub) / size - g.cx;
          const double u = (cos_a * px + sin_a * py) / g.radius;
          const double v = (-sin_a * px + cos_a * py) / g.radius;
          if (inside(glyph, u, v)) ++hits;
        }
      }
      const double coverage = static_cast<double>(hits) / (kSub * kSub);
      double tex = style.texture == Texture::kSpeckle
                       ? (unit(noise_rng) < 0.25 ? 1.0 : -0.3)
                       : texture_value(style.texture, style.period, y, x);
      tex *= amplitude;
      for (int c = 0; c < 3; ++c) {
        double value = (1.0 - coverage) * bg[c] + coverage * fg[c] + tex;
        if (sigma > 0.0) value += sigma * noise(noise_rng);
        img.at(y, x, c) = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  return img;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_classes < 2 || num_classes > kMaxSyntheticClasses) {
    throw ConfigError(fmt::format("synthetic num_classes must be in [2, {}], got {}",
                                  kMaxSyntheticClasses, num_classes));
  }
  if (num_domains < 2) {
    throw ConfigError(fmt::format("synthetic num_domains must be >= 2, got {}", num_domains));
  }
  if (n_per_cell < 1) {
    throw ConfigError(fmt::format("n_per_cell must be >= 1, got {}", n_per_cell));
  }
  if (image_size < kMinSyntheticImageSize) {
    throw ConfigError(fmt::format("image_size {} is too small to render glyphs (min {})",
                                  image_size, kMinSyntheticImageSize));
  }
  if (!(nuisance_strength >= 0.0 && nuisance_strength <= 1.0)) {
    throw ConfigError(fmt::format("nuisance_strength must be in [0, 1], got {}",
                                  nuisance_strength));
  }
}

DGDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  DGDataset ds;
  ds.space = LabelSpace(spec.num_classes, spec.num_domains);
  ds.image_shape = {spec.image_size, spec.image_size, 3};
  ds.provenance = Provenance::kSynthetic;
  const int width = spec.num_domains > 10 ? 2 : 1;
  for (int d = 0; d < spec.num_domains; ++d) {
    ds.domain_names.push_back(fmt::format("style_{:0{}}", d, width));
  }
  for (int k = 0; k < spec.num_classes; ++k) {
    ds.class_names.push_back(fmt::format("{}_{}", k, kGlyphNames[k]));
  }

  const std::vector<DomainStyle> styles = draw_styles(spec);
  ds.examples.reserve(static_cast<std::size_t>(spec.num_domains) * spec.num_classes *
                      spec.n_per_cell);
  for (int d = 0; d < spec.num_domains; ++d) {
    for (int k = 0; k < spec.num_classes; ++k) {
      for (int i = 0; i < spec.n_per_cell; ++i) {
        // Geometry depends on (class, index) only, never on the domain.
        std::mt19937_64 geo_rng = rng_for(
            spec.seed, {kStreamGeometry, static_cast<std::uint32_t>(k),
                        static_cast<std::uint32_t>(i)});
        std::uniform_real_distribution<double> jitter(-0.12, 0.12);
        Geometry g;
        g.cx = 0.5 + jitter(geo_rng);
        g.cy = 0.5 + jitter(geo_rng);
        g.radius = std::uniform_real_distribution<double>(0.26, 0.36)(geo_rng);
        g.angle = std::uniform_real_distribution<double>(-0.25, 0.25)(geo_rng);

        std::mt19937_64 noise_rng = rng_for(
            spec.seed, {kStreamNoise, static_cast<std::uint32_t>(d),
                        static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i)});
        LabeledExample ex;
        ex.image = render(spec, static_cast<Glyph>(k), g, styles[d], noise_rng);
        ex.class_label = k;
        ex.domain_label = d;
        ex.domain_name = ds.domain_names[d];
        ex.example_id = fmt::format("{}/{}/{:05}", ds.domain_names[d], ds.class_names[k], i);
        ds.examples.push_back(std::move(ex));
      }
    }
  }
  ds.reindex();
  return ds;
}

}  // namespace cddg
