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

#include "pixelprobe/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pixelprobe/errors.hpp"
#include "pixelprobe/max_flow.hpp"

namespace pixelprobe::seg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RegionSamples {
  std::vector<Eigen::Vector3d> colors;
  std::vector<std::size_t> pixels;
};

RegionSamples collect(const Image& image, const RegionMask& labeling, bool foreground) {
  RegionSamples out;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (labeling.is_foreground(x, y) == foreground) {
        out.colors.push_back(to_vector(image.pixel(x, y)));
        out.pixels.push_back(static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width()) +
                             static_cast<std::size_t>(x));
      }
    }
  }
  if (out.colors.empty()) {
    throw ContractViolation(std::string(foreground ? "foreground" : "background") +
                            " region is empty");
  }
  return out;
}

void require_labeling(const Image& image, const RegionMask& labeling) {
  if (labeling.height() != image.height() || labeling.width() != image.width()) {
    throw ContractViolation("labeling dimensions do not match image");
  }
}

RegionMask mask_from_labels(int height, int width, const std::vector<std::uint8_t>& labels) {
  return RegionMask(height, width, labels);
}

}  // namespace

Trimap::Trimap(int height, int width, TrimapLabel fill)
    : height_(height), width_(width),
      labels_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {
  if (height <= 0 || width <= 0) throw ContractViolation("trimap dimensions must be positive");
}

Trimap::Trimap(int height, int width, std::vector<TrimapLabel> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (height <= 0 || width <= 0 ||
      labels_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ContractViolation("trimap labels do not match dimensions");
  }
}

Trimap Trimap::from_rectangle(int height, int width, int x0, int y0, int x1, int y1) {
  Trimap t(height, width, TrimapLabel::background);
  x0 = std::clamp(x0, 0, width);
  x1 = std::clamp(x1, 0, width);
  y0 = std::clamp(y0, 0, height);
  y1 = std::clamp(y1, 0, height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) t.set(x, y, TrimapLabel::unknown);
  }
  return t;
}

Trimap Trimap::from_gray(const GrayImage& gray) {
  std::vector<TrimapLabel> labels;
  labels.reserve(gray.values.size());
  for (auto v : gray.values) {
    labels.push_back(v < 64 ? TrimapLabel::background
                            : (v < 192 ? TrimapLabel::unknown : TrimapLabel::foreground));
  }
  return Trimap(gray.height, gray.width, std::move(labels));
}

Trimap Trimap::load(const std::filesystem::path& path) { return from_gray(read_gray_png(path)); }

std::size_t Trimap::count(TrimapLabel label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

GmmModel fit_gmms(const Image& image, const RegionMask& labeling, const GrabcutParams& params) {
  require_labeling(image, labeling);
  if (params.components_per_region < 1) throw ContractViolation("need at least one component");
  GmmModel model;
  for (bool fg : {true, false}) {
    const auto samples = collect(image, labeling, fg);
    const auto assignment = kmeans_assign(samples.colors, params.components_per_region);
    (fg ? model.foreground : model.background) =
        estimate_gmm(samples.colors, assignment, params.covariance_floor);
  }
  return model;
}

GmmModel refit_gmms(const Image& image, const RegionMask& labeling, const GmmModel& model,
                    const GrabcutParams& params) {
  require_labeling(image, labeling);
  GmmModel out;
  for (bool fg : {true, false}) {
    const auto samples = collect(image, labeling, fg);
    const Gmm& current = model.region(fg);
    std::vector<int> assignment(samples.colors.size());
    for (std::size_t i = 0; i < samples.colors.size(); ++i) {
      current.min_cost(samples.colors[i], &assignment[i]);
    }
    (fg ? out.foreground : out.background) =
        estimate_gmm(samples.colors, assignment, params.covariance_floor);
  }
  return out;
}

double data_term(const Rgb& z, bool foreground, const GmmModel& model) {
  return model.region(foreground).min_cost(to_vector(z));
}

SmoothnessTerm smoothness_term(const Image& image, const GrabcutParams& params) {
  SmoothnessTerm out;
  const int h = image.height();
  const int w = image.width();
  // Forward half of the 8-neighbourhood: right, down-left, down, down-right.
  constexpr int kOffsets[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  std::vector<double> distances;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d z = to_vector(image.pixel(x, y));
      for (const auto& o : kOffsets) {
        const int nx = x + o[0];
        const int ny = y + o[1];
        if (!image.contains(nx, ny)) continue;
        distances.push_back((z - to_vector(image.pixel(nx, ny))).squaredNorm());
        out.edges.push_back({y * w + x, ny * w + nx, 0.0});
      }
    }
  }
  double mean = 0.0;
  for (double d : distances) mean += d;
  if (!distances.empty()) mean /= static_cast<double>(distances.size());
  out.beta = mean > 0.0 ? 1.0 / (2.0 * mean) : 0.0;
  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    out.edges[i].weight = params.gamma * std::exp(-out.beta * distances[i]);
  }
  return out;
}

DataTerms data_terms(const Image& image, const GmmModel& model) {
  DataTerms out;
  out.foreground.reserve(image.pixel_count());
  out.background.reserve(image.pixel_count());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Eigen::Vector3d z = to_vector(image.pixel(x, y));
      out.foreground.push_back(model.foreground.min_cost(z));
      out.background.push_back(model.background.min_cost(z));
    }
  }
  return out;
}

double labeling_energy(std::span<const std::uint8_t> labeling, const DataTerms& data,
                       std::span<const NeighborEdge> edges) {
  double energy = 0.0;
  for (std::size_t n = 0; n < labeling.size(); ++n) {
    energy += labeling[n] ? data.foreground[n] : data.background[n];
  }
  for (const auto& e : edges) {
    if (labeling[static_cast<std::size_t>(e.a)] != labeling[static_cast<std::size_t>(e.b)]) {
      energy += e.weight;
    }
  }
  return energy;
}

std::vector<std::uint8_t> min_cut(const DataTerms& data, std::span<const NeighborEdge> edges,
                                  const Trimap& trimap) {
  const std::size_t n = trimap.labels().size();
  if (data.foreground.size() != n || data.background.size() != n) {
    throw ContractViolation("data terms do not match the trimap size");
  }
  MaxFlowGraph graph(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double fg = data.foreground[i];
    const double bg = data.background[i];
    if (!std::isfinite(fg) || !std::isfinite(bg)) throw ContractViolation("non-finite data term");
    switch (trimap.labels()[i]) {
      case TrimapLabel::foreground:
        graph.add_terminal_edges(static_cast<int>(i), kInf, 0.0);
        break;
      case TrimapLabel::background:
        graph.add_terminal_edges(static_cast<int>(i), 0.0, kInf);
        break;
      case TrimapLabel::unknown: {
        // Source side = foreground: cutting the sink link pays the foreground
        // cost, cutting the source link pays the background cost.
        const double base = std::min(fg, bg);
        graph.add_terminal_edges(static_cast<int>(i), bg - base, fg - base);
        break;
      }
    }
  }
  for (const auto& e : edges) {
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw ContractViolation("edge weights must be finite and non-negative");
    }
    graph.add_edge(e.a, e.b, e.weight, e.weight);
  }
  graph.solve();
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = graph.on_source_side(static_cast<int>(i)) ? 1 : 0;
  return labels;
}

GrabcutResult grabcut(const Image& image, const Trimap& trimap, const GrabcutParams& params) {
  if (trimap.height() != image.height() || trimap.width() != image.width()) {
    throw ContractViolation("trimap dimensions do not match image");
  }
  if (params.iterations < 1) throw ContractViolation("grabcut needs at least one iteration");
  if (params.gamma < 0.0) throw ContractViolation("gamma must be non-negative");
  if (trimap.count(TrimapLabel::unknown) == 0) {
    throw ContractViolation("trimap has no unknown pixels");
  }
  if (trimap.count(TrimapLabel::background) == 0) {
    throw ContractViolation("trimap has no definite background pixels");
  }

  std::vector<std::uint8_t> labels(trimap.labels().size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = trimap.labels()[i] == TrimapLabel::background ? 0 : 1;
  }
  RegionMask labeling = mask_from_labels(image.height(), image.width(), labels);

  const SmoothnessTerm smoothness = smoothness_term(image, params);
  GmmModel model = fit_gmms(image, labeling, params);

  GrabcutResult result;
  for (int it = 0; it < params.iterations; ++it) {
    model = refit_gmms(image, labeling, model, params);
    const DataTerms data = data_terms(image, model);
    auto next = min_cut(data, smoothness.edges, trimap);
    const auto fg = static_cast<std::size_t>(std::count(next.begin(), next.end(), std::uint8_t{1}));
    if (fg == 0 || fg == next.size()) {
      result.degenerate = true;
      break;
    }
    result.energies.push_back(labeling_energy(next, data, smoothness.edges));
    result.iterations = it + 1;
    const bool changed = next != labels;
    labels = std::move(next);
    labeling = mask_from_labels(image.height(), image.width(), labels);
    if (!changed) break;
  }
  result.mask = labeling;
  return result;
}

RegionMask load_mask(const std::filesystem::path& path, int height, int width) {
  RegionMask mask = read_mask_png(path);
  if (mask.height() != height || mask.width() != width) {
    throw LoadError("mask '" + path.string() + "' is " + std::to_string(mask.height()) + "x" +
                    std::to_string(mask.width()) + ", image is " + std::to_string(height) + "x" +
                    std::to_string(width));
  }
  return mask;
}

}  // namespace pixelprobe::seg
