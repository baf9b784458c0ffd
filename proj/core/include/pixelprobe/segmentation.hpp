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

#ifndef PIXELPROBE_SEGMENTATION_HPP
#define PIXELPROBE_SEGMENTATION_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pixelprobe/gmm.hpp"
#include "pixelprobe/image.hpp"
#include "pixelprobe/image_io.hpp"

namespace pixelprobe::seg {

enum class TrimapLabel : std::uint8_t { background, unknown, foreground };

class Trimap {
 public:
  Trimap(int height, int width, TrimapLabel fill = TrimapLabel::background);
  Trimap(int height, int width, std::vector<TrimapLabel> labels);

  /// Unknown inside [x0, x1) x [y0, y1), definite background elsewhere.
  static Trimap from_rectangle(int height, int width, int x0, int y0, int x1, int y1);
  /// 0 = background, 128 = unknown, 255 = foreground. Other values map to the
  /// nearest of the three.
  static Trimap from_gray(const GrayImage& gray);
  static Trimap load(const std::filesystem::path& path);

  int height() const { return height_; }
  int width() const { return width_; }
  TrimapLabel at(int x, int y) const { return labels_[index(x, y)]; }
  void set(int x, int y, TrimapLabel label) { labels_[index(x, y)] = label; }
  std::size_t count(TrimapLabel label) const;
  std::span<const TrimapLabel> labels() const { return labels_; }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int height_;
  int width_;
  std::vector<TrimapLabel> labels_;
};

struct GrabcutParams {
  int components_per_region = 5;
  double gamma = 50.0;
  int iterations = 5;
  double covariance_floor = kCovarianceFloor;
};

/// Fits fresh foreground and background colour mixtures to a hard labeling:
/// k-means per region, then moment estimation. A region with fewer pixels than
/// k uses one component per pixel. Throws ContractViolation if a region is
/// empty.
GmmModel fit_gmms(const Image& image, const RegionMask& labeling, const GrabcutParams& params);

/// Refits both mixtures from per-pixel component indices (the GrabCut
/// assignment step followed by maximum-likelihood learning).
GmmModel refit_gmms(const Image& image, const RegionMask& labeling, const GmmModel& model,
                    const GrabcutParams& params);

/// min over the region's components of -log pi - log N(z).
double data_term(const Rgb& z, bool foreground, const GmmModel& model);

struct NeighborEdge {
  int a;
  int b;
  double weight;
};

struct SmoothnessTerm {
  double beta = 0.0;
  std::vector<NeighborEdge> edges;  // each unordered 8-neighbour pair once
};

/// gamma * exp(-beta * |z_m - z_n|^2) for every 8-connected pair, with
/// beta = 1 / (2 <|z_m - z_n|^2>) over all pairs, or 0 for a uniform image.
SmoothnessTerm smoothness_term(const Image& image, const GrabcutParams& params);

/// Per-pixel data costs for both labels.
struct DataTerms {
  std::vector<double> foreground;
  std::vector<double> background;
};

DataTerms data_terms(const Image& image, const GmmModel& model);

/// U + V of a labeling (1 = foreground per pixel).
double labeling_energy(std::span<const std::uint8_t> labeling, const DataTerms& data,
                       std::span<const NeighborEdge> edges);

/// Exact minimizer of U + V over labelings that respect the trimap pins
/// (definite foreground/background pixels are fixed), via s-t min cut.
/// Returns 1 for foreground per pixel.
std::vector<std::uint8_t> min_cut(const DataTerms& data, std::span<const NeighborEdge> edges,
                                  const Trimap& trimap);

struct GrabcutResult {
  RegionMask mask;
  int iterations = 0;
  // Energy after each iteration's cut.
  std::vector<double> energies;
  // Set when a cut emptied one region; mask then holds the last valid labeling.
  bool degenerate = false;
};

/// Iterated hard segmentation: assign components, refit mixtures, cut. Stops
/// after params.iterations or once the labeling stops changing.
GrabcutResult grabcut(const Image& image, const Trimap& trimap, const GrabcutParams& params = {});

/// Reads an externally produced mask and checks it against the paired
/// image's dimensions. Throws LoadError on mismatch.
RegionMask load_mask(const std::filesystem::path& path, int height, int width);

}  // namespace pixelprobe::seg

#endif  // PIXELPROBE_SEGMENTATION_HPP
