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

#include "pixelprobe/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pixelprobe/errors.hpp"

namespace pixelprobe {
namespace {

double clamp_intensity(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, kMaxIntensity);
}

void require_same_shape(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ContractViolation("image dimensions differ: " +
                            std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                            " vs " + std::to_string(b.height()) + "x" +
                            std::to_string(b.width()));
  }
}

void require_mask_shape(const Image& image, const RegionMask& mask) {
  if (image.height() != mask.height() || image.width() != mask.width()) {
    throw ContractViolation("mask dimensions do not match image");
  }
}

void require_candidate(std::span<const double> candidate) {
  if (candidate.empty() || candidate.size() % kTupleSize != 0) {
    throw ContractViolation("candidate length " + std::to_string(candidate.size()) +
                            " is not a positive multiple of 5");
  }
}

}  // namespace

Image::Image(int height, int width) : Image(height, width, {}) {}

Image::Image(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height <= 0 || width <= 0) {
    throw ContractViolation("image dimensions must be positive");
  }
  const std::size_t expected = pixel_count() * kChannels;
  if (data_.empty()) {
    data_.assign(expected, 0.0);
  } else if (data_.size() != expected) {
    throw ContractViolation("image data length " + std::to_string(data_.size()) +
                            " != " + std::to_string(expected));
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= kMaxIntensity)) {
      throw ContractViolation("pixel value outside [0, 255]");
    }
  }
}

Rgb Image::pixel(int x, int y) const {
  const std::size_t o = offset(x, y);
  return {data_[o], data_[o + 1], data_[o + 2]};
}

void Image::set_pixel(int x, int y, const Rgb& rgb) {
  const std::size_t o = offset(x, y);
  for (int c = 0; c < kChannels; ++c) data_[o + c] = clamp_intensity(rgb[c]);
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::whole: return "whole";
    case Region::foreground: return "foreground";
    case Region::background: return "background";
  }
  return "whole";
}

Region parse_region(std::string_view text) {
  if (text == "whole") return Region::whole;
  if (text == "foreground" || text == "fg") return Region::foreground;
  if (text == "background" || text == "bg") return Region::background;
  throw ContractViolation("unknown region '" + std::string(text) + "'");
}

RegionMask::RegionMask(int height, int width, bool foreground)
    : height_(height), width_(width),
      fg_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
          foreground ? 1 : 0) {
  if (height <= 0 || width <= 0) {
    throw ContractViolation("mask dimensions must be positive");
  }
}

RegionMask::RegionMask(int height, int width, std::vector<std::uint8_t> membership)
    : height_(height), width_(width), fg_(std::move(membership)) {
  if (height <= 0 || width <= 0 ||
      fg_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ContractViolation("mask membership length does not match dimensions");
  }
  for (auto& v : fg_) v = v ? 1 : 0;
}

void RegionMask::set_foreground(int x, int y, bool value) {
  fg_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
      static_cast<std::size_t>(x)] = value ? 1 : 0;
}

bool RegionMask::contains(Region region, int x, int y) const {
  switch (region) {
    case Region::whole: return true;
    case Region::foreground: return is_foreground(x, y);
    case Region::background: return !is_foreground(x, y);
  }
  return false;
}

std::size_t RegionMask::foreground_count() const {
  return static_cast<std::size_t>(std::count(fg_.begin(), fg_.end(), std::uint8_t{1}));
}

std::size_t RegionMask::background_count() const { return fg_.size() - foreground_count(); }

std::size_t RegionMask::count(Region region) const {
  switch (region) {
    case Region::whole: return fg_.size();
    case Region::foreground: return foreground_count();
    case Region::background: return background_count();
  }
  return 0;
}

Candidate::Candidate(std::vector<double> values) : values_(std::move(values)) {
  require_candidate(values_);
}

int discretize_coordinate(double value, int extent) {
  if (std::isnan(value)) return 0;
  const double rounded = std::floor(value + 0.5);
  if (rounded <= 0.0) return 0;
  if (rounded >= static_cast<double>(extent - 1)) return extent - 1;
  return static_cast<int>(rounded);
}

Image apply_perturbation(const Image& image, std::span<const double> candidate) {
  return perturb_in_region(image, candidate, nullptr, Region::whole);
}

Image apply_perturbation(const Image& image, const Candidate& candidate) {
  return apply_perturbation(image, candidate.values());
}

Image composite(const Image& original, const Image& perturbed, const RegionMask& mask,
                Region region) {
  require_same_shape(original, perturbed);
  require_mask_shape(original, mask);
  Image out = original;
  for (int y = 0; y < original.height(); ++y) {
    for (int x = 0; x < original.width(); ++x) {
      if (mask.contains(region, x, y)) out.set_pixel(x, y, perturbed.pixel(x, y));
    }
  }
  return out;
}

Image perturb_in_region(const Image& original, std::span<const double> candidate,
                        const RegionMask* mask, Region region) {
  require_candidate(candidate);
  if (region != Region::whole) {
    if (mask == nullptr) throw ContractViolation("region-constrained perturbation needs a mask");
    require_mask_shape(original, *mask);
  }
  Image out = original;
  for (std::size_t t = 0; t < candidate.size(); t += kTupleSize) {
    const int x = discretize_coordinate(candidate[t], original.width());
    const int y = discretize_coordinate(candidate[t + 1], original.height());
    if (region != Region::whole && !mask->contains(region, x, y)) continue;
    out.set_pixel(x, y, {candidate[t + 2], candidate[t + 3], candidate[t + 4]});
  }
  return out;
}

std::vector<PixelCoord> changed_pixels(const Image& a, const Image& b) {
  require_same_shape(a, b);
  std::vector<PixelCoord> out;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (a.pixel(x, y) != b.pixel(x, y)) out.push_back({x, y});
    }
  }
  return out;
}

int ClassProbabilities::argmax() const {
  if (probs_.empty()) throw ContractViolation("argmax of an empty probability vector");
  return static_cast<int>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

std::vector<int> ClassProbabilities::top_k(std::size_t k) const {
  if (k > probs_.size()) {
    throw ContractViolation("top-" + std::to_string(k) + " requested from " +
                            std::to_string(probs_.size()) + " classes");
  }
  std::vector<int> order(probs_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs_[a] > probs_[b]; });
  order.resize(k);
  return order;
}

bool ClassProbabilities::is_simplex(double tolerance) const {
  if (probs_.empty()) return false;
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

}  // namespace pixelprobe
