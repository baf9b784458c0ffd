/*
 * Copyright 2026 The PixelProbe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pixelprobe/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "pixelprobe/errors.hpp"

namespace pixelprobe::synthetic {
namespace {

using Rng = std::mt19937_64;

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::string entry_id(const char* prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return std::string(prefix) + "_" + digits;
}

constexpr std::array<Rgb, 4> kPalette{{
    {1.0, 0.1, 0.1},
    {0.1, 1.0, 0.1},
    {0.1, 0.1, 1.0},
    {1.0, 1.0, 0.1},
}};

}  // namespace

std::vector<attack::DatasetEntry> center_patch_dataset(std::size_t count, std::uint64_t seed,
                                                       const PatchOptions& options) {
  if (options.classes < 2 || options.classes > static_cast<int>(kPalette.size())) {
    throw ContractViolation("center patch dataset supports 2 to 4 classes");
  }
  if (options.patch <= 0 || options.patch > options.size) {
    throw ContractViolation("patch must fit inside the image");
  }
  Rng rng(seed);
  const int lo = (options.size - options.patch) / 2;
  const int hi = lo + options.patch;
  RegionMask mask(options.size, options.size);
  for (int y = lo; y < hi; ++y) {
    for (int x = lo; x < hi; ++x) mask.set_foreground(x, y, true);
  }

  std::vector<attack::DatasetEntry> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(options.classes));
    const double signal = uniform(rng, options.min_signal, options.max_signal);
    Image image(options.size, options.size);
    for (int y = 0; y < options.size; ++y) {
      for (int x = 0; x < options.size; ++x) {
        const bool in_patch = mask.is_foreground(x, y);
        Rgb px{};
        for (int c = 0; c < kChannels; ++c) {
          const double noise = uniform01(rng);
          const double tint = kPalette[static_cast<std::size_t>(label)][static_cast<std::size_t>(c)];
          const double v =
              in_patch ? 0.5 + signal * (tint - 0.5) + options.patch_noise * (noise - 0.5)
                       : options.background_noise * noise;
          px[static_cast<std::size_t>(c)] = std::round(v * kMaxIntensity);
        }
        image.set_pixel(x, y, px);
      }
    }
    out.push_back({entry_id("patch", i), std::move(image), mask, label});
  }
  return out;
}

std::vector<attack::DatasetEntry> quadrant_dataset(std::size_t count, std::uint64_t seed,
                                                   const QuadrantOptions& options) {
  if (options.size < 2 || options.size % 2 != 0) {
    throw ContractViolation("quadrant dataset needs an even size");
  }
  Rng rng(seed);
  const int half = options.size / 2;
  std::vector<attack::DatasetEntry> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(i % 4);
    const double signal = uniform(rng, options.min_signal, options.max_signal);
    Image image(options.size, options.size);
    for (int y = 0; y < options.size; ++y) {
      for (int x = 0; x < options.size; ++x) {
        const int quadrant = (y >= half ? 2 : 0) + (x >= half ? 1 : 0);
        Rgb px{};
        for (int c = 0; c < kChannels; ++c) {
          double v = (1.0 - signal) * uniform01(rng);
          if (quadrant == label) v += signal;
          px[static_cast<std::size_t>(c)] = std::round(v * kMaxIntensity);
        }
        image.set_pixel(x, y, px);
      }
    }
    out.push_back({entry_id("quad", i), std::move(image), std::nullopt, label});
  }
  return out;
}

std::vector<Image> random_images(std::size_t count, int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Image> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> data(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
                             kChannels);
    for (double& v : data) v = std::floor(uniform01(rng) * 256.0);
    out.emplace_back(height, width, std::move(data));
  }
  return out;
}

std::vector<ShapeSample> shape_samples(std::size_t count, std::uint64_t seed, int size) {
  if (size < 16) throw ContractViolation("shape samples need at least 16x16");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.03);
  std::vector<ShapeSample> out;
  out.reserve(count);
  const double lo_c = size * 0.35;
  const double hi_c = size * 0.65;
  for (std::size_t i = 0; i < count; ++i) {
    Rgb field{};
    Rgb shape{};
    double distance = 0.0;
    while (distance < 0.6) {
      for (int c = 0; c < kChannels; ++c) {
        field[static_cast<std::size_t>(c)] = uniform01(rng);
        shape[static_cast<std::size_t>(c)] = uniform01(rng);
      }
      distance = std::sqrt(std::pow(field[0] - shape[0], 2) + std::pow(field[1] - shape[1], 2) +
                           std::pow(field[2] - shape[2], 2));
    }
    const bool disk = i % 2 == 0;
    const double cx = uniform(rng, lo_c, hi_c);
    const double cy = uniform(rng, lo_c, hi_c);
    const double rx = uniform(rng, size * 0.15, size * 0.28);
    const double ry = disk ? rx : uniform(rng, size * 0.15, size * 0.28);

    Image image(size, size);
    RegionMask truth(size, size);
    int x0 = size, y0 = size, x1 = 0, y1 = 0;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const bool inside = disk ? dx * dx + dy * dy <= rx * rx
                                 : std::abs(dx) <= rx && std::abs(dy) <= ry;
        const Rgb& base = inside ? shape : field;
        Rgb px{};
        for (std::size_t c = 0; c < 3; ++c) {
          px[c] = std::round(std::clamp(base[c] + noise(rng), 0.0, 1.0) * kMaxIntensity);
        }
        image.set_pixel(x, y, px);
        if (inside) {
          truth.set_foreground(x, y, true);
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x + 1);
          y1 = std::max(y1, y + 1);
        }
      }
    }
    constexpr int kMargin = 3;
    auto trimap = seg::Trimap::from_rectangle(size, size, x0 - kMargin, y0 - kMargin,
                                              x1 + kMargin, y1 + kMargin);
    out.push_back({std::move(image), std::move(truth), std::move(trimap)});
  }
  return out;
}

std::vector<oracle::LabeledImage> labeled(std::span<const attack::DatasetEntry> entries) {
  std::vector<oracle::LabeledImage> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.label) throw ContractViolation("entry '" + e.id + "' has no label");
    out.push_back({e.image, *e.label});
  }
  return out;
}

double iou(const RegionMask& a, const RegionMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ContractViolation("masks differ in size");
  }
  std::size_t both = 0;
  std::size_t either = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const bool fa = a.is_foreground(x, y);
      const bool fb = b.is_foreground(x, y);
      both += fa && fb;
      either += fa || fb;
    }
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace pixelprobe::synthetic
