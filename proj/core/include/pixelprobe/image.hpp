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

#ifndef PIXELPROBE_IMAGE_HPP
#define PIXELPROBE_IMAGE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace pixelprobe {

inline constexpr int kChannels = 3;
inline constexpr double kMaxIntensity = 255.0;

using Rgb = std::array<double, kChannels>;

struct PixelCoord {
  int x = 0;  // column
  int y = 0;  // row
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

/// H x W x 3 RGB image with real-valued intensities in [0, 255], stored
/// row-major with interleaved channels.
class Image {
 public:
  Image() = default;
  /// All-black image.
  Image(int height, int width);
  /// Takes ownership of `data`; throws ContractViolation if the length is not
  /// height*width*3 or any value lies outside [0, 255].
  Image(int height, int width, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }

  double at(int x, int y, int channel) const {
    return data_[offset(x, y) + static_cast<std::size_t>(channel)];
  }
  Rgb pixel(int x, int y) const;
  Rgb pixel(PixelCoord p) const { return pixel(p.x, p.y); }

  /// Writes a pixel, clamping each channel into [0, 255].
  void set_pixel(int x, int y, const Rgb& rgb);

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * kChannels;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

enum class Region { whole, foreground, background };

std::string_view to_string(Region region);
/// Accepts "whole", "foreground"/"fg", "background"/"bg".
Region parse_region(std::string_view text);

/// Boolean foreground/background partition of an image's pixels.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int height, int width, bool foreground = false);
  RegionMask(int height, int width, std::vector<std::uint8_t> membership);

  int height() const { return height_; }
  int width() const { return width_; }

  bool is_foreground(int x, int y) const {
    return fg_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x)] != 0;
  }
  void set_foreground(int x, int y, bool value);

  /// True if (x, y) belongs to the given region; Region::whole contains all.
  bool contains(Region region, int x, int y) const;

  std::size_t foreground_count() const;
  std::size_t background_count() const;
  std::size_t count(Region region) const;

  std::span<const std::uint8_t> membership() const { return fg_; }

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> fg_;
};

inline constexpr int kTupleSize = 5;

/// Flat DE genome: l consecutive (x, y, r, g, b) tuples.
class Candidate {
 public:
  explicit Candidate(std::vector<double> values);

  std::size_t pixel_count() const { return values_.size() / kTupleSize; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Nearest pixel for a continuous coordinate: round half up, then clamp into
/// [0, extent - 1].
int discretize_coordinate(double value, int extent);

/// Copy of `image` with each tuple's pixel replaced by its clamped colour.
/// Later tuples overwrite earlier ones on coordinate collisions.
Image apply_perturbation(const Image& image, std::span<const double> candidate);
Image apply_perturbation(const Image& image, const Candidate& candidate);

/// Pixels from `perturbed` inside `region`, from `original` elsewhere.
Image composite(const Image& original, const Image& perturbed,
                const RegionMask& mask, Region region);

/// Fused apply_perturbation + composite: tuples whose pixel falls outside
/// `region` are ignored. `mask` may be null only for Region::whole.
Image perturb_in_region(const Image& original, std::span<const double> candidate,
                        const RegionMask* mask, Region region);

/// Coordinates where the two images differ, in row-major order.
std::vector<PixelCoord> changed_pixels(const Image& a, const Image& b);

class ClassProbabilities {
 public:
  ClassProbabilities() = default;
  explicit ClassProbabilities(std::vector<double> probs) : probs_(std::move(probs)) {}

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const { return probs_; }

  /// Highest-probability class; ties go to the lowest index.
  int argmax() const;
  /// The k most probable classes, ties broken by ascending class index.
  std::vector<int> top_k(std::size_t k) const;
  /// Non-negative and summing to one within `tolerance`.
  bool is_simplex(double tolerance = 1e-5) const;

  friend bool operator==(const ClassProbabilities&, const ClassProbabilities&) = default;

 private:
  std::vector<double> probs_;
};

}  // namespace pixelprobe

#endif  // PIXELPROBE_IMAGE_HPP
