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

#include "pixelprobe/image_io.hpp"

#include <png.h>

#include <cmath>
#include <string>

#include "pixelprobe/errors.hpp"

namespace pixelprobe {
namespace {

std::vector<std::uint8_t> read_with_format(const std::filesystem::path& path,
                                           png_uint_32 format, int& height, int& width) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw LoadError("cannot read PNG '" + path.string() + "': " + img.message);
  }
  img.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&img);
    throw LoadError("cannot decode PNG '" + path.string() + "': " + img.message);
  }
  height = static_cast<int>(img.height);
  width = static_cast<int>(img.width);
  return buffer;
}

void write_with_format(const std::filesystem::path& path, png_uint_32 format, int height,
                       int width, const std::vector<std::uint8_t>& buffer) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw LoadError("cannot write PNG '" + path.string() + "': " + img.message);
  }
}

}  // namespace

std::uint8_t quantize(double intensity) {
  if (!(intensity > 0.0)) return 0;
  if (intensity >= kMaxIntensity) return 255;
  return static_cast<std::uint8_t>(std::lround(intensity));
}

Image read_png(const std::filesystem::path& path) {
  int height = 0;
  int width = 0;
  const auto bytes = read_with_format(path, PNG_FORMAT_RGB, height, width);
  return Image(height, width, std::vector<double>(bytes.begin(), bytes.end()));
}

void write_png(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.data().size());
  for (double v : image.data()) bytes.push_back(quantize(v));
  write_with_format(path, PNG_FORMAT_RGB, image.height(), image.width(), bytes);
}

GrayImage read_gray_png(const std::filesystem::path& path) {
  GrayImage out;
  out.values = read_with_format(path, PNG_FORMAT_GRAY, out.height, out.width);
  return out;
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& image) {
  write_with_format(path, PNG_FORMAT_GRAY, image.height, image.width, image.values);
}

RegionMask read_mask_png(const std::filesystem::path& path) {
  GrayImage gray = read_gray_png(path);
  for (auto& v : gray.values) v = v >= 128 ? 1 : 0;
  return RegionMask(gray.height, gray.width, std::move(gray.values));
}

void write_mask_png(const std::filesystem::path& path, const RegionMask& mask) {
  GrayImage gray{mask.height(), mask.width(), {}};
  gray.values.reserve(mask.membership().size());
  for (auto v : mask.membership()) gray.values.push_back(v ? 255 : 0);
  write_gray_png(path, gray);
}

}  // namespace pixelprobe
