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

#ifndef PIXELPROBE_SYNTHETIC_HPP
#define PIXELPROBE_SYNTHETIC_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pixelprobe/attack.hpp"
#include "pixelprobe/builtin_classifiers.hpp"
#include "pixelprobe/segmentation.hpp"

// Seeded generators for the small datasets used by tests, benchmarks and the
// `synth` subcommand. Same seed, same bytes.
namespace pixelprobe::synthetic {

struct PatchOptions {
  int size = 16;
  int patch = 8;
  int classes = 4;
  // Per-image strength of the class colour in the patch, drawn uniformly.
  double min_signal = 0.03;
  double max_signal = 0.1;
  // Amplitude of the uniform noise inside the patch.
  double patch_noise = 0.2;
  // Background pixels are uniform in [0, background_noise].
  double background_noise = 0.1;
};

/// Images whose class lives only in a centred square patch: mid-grey shifted
/// towards the class colour, plus mild noise. Everything else is uniform
/// noise. Each entry carries its label and a mask whose foreground
/// is the patch.
std::vector<attack::DatasetEntry> center_patch_dataset(std::size_t count, std::uint64_t seed,
                                                       const PatchOptions& options = {});

struct QuadrantOptions {
  int size = 8;
  // Brightness added to the class quadrant on top of uniform noise.
  double min_signal = 0.1;
  double max_signal = 0.5;
};

/// Four classes, one per image quadrant: the labelled quadrant is brighter.
std::vector<attack::DatasetEntry> quadrant_dataset(std::size_t count, std::uint64_t seed,
                                                   const QuadrantOptions& options = {});

/// Uniform noise images.
std::vector<Image> random_images(std::size_t count, int height, int width, std::uint64_t seed);

struct ShapeSample {
  Image image;
  RegionMask truth;
  seg::Trimap trimap;
};

/// 32x32 disks and rectangles on a contrasting field, with ground-truth masks
/// and a rectangle trimap that loosely bounds the shape.
std::vector<ShapeSample> shape_samples(std::size_t count, std::uint64_t seed, int size = 32);

std::vector<oracle::LabeledImage> labeled(std::span<const attack::DatasetEntry> entries);

/// |A and B| / |A or B| over foreground pixels; 1 when both are empty.
double iou(const RegionMask& a, const RegionMask& b);

}  // namespace pixelprobe::synthetic

#endif  // PIXELPROBE_SYNTHETIC_HPP
