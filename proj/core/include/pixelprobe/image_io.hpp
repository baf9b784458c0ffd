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

#ifndef PIXELPROBE_IMAGE_IO_HPP
#define PIXELPROBE_IMAGE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pixelprobe/image.hpp"

namespace pixelprobe {

// 8-bit RGB PNG. Reading converts any colour type libpng understands to RGB
// (alpha is dropped). Writing rounds intensities to the nearest integer.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;
};

GrayImage read_gray_png(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path, const GrayImage& image);

// Masks are single-channel PNGs; values >= 128 are foreground. Saving writes
// 255 for foreground and 0 for background.
RegionMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const RegionMask& mask);

// Rounds to nearest and clamps; the quantization used for files and the wire.
std::uint8_t quantize(double intensity);

}  // namespace pixelprobe

#endif  // PIXELPROBE_IMAGE_IO_HPP
