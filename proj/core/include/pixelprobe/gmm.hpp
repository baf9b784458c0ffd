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

#ifndef PIXELPROBE_GMM_HPP
#define PIXELPROBE_GMM_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pixelprobe/image.hpp"

namespace pixelprobe::seg {

inline constexpr double kCovarianceFloor = 1e-3;

struct GaussianComponent {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
  double weight = 1.0;
  Eigen::Matrix3d inverse = Eigen::Matrix3d::Identity();
  double log_det = 0.0;

  /// Builds a component and caches the inverse and log-determinant.
  static GaussianComponent make(const Eigen::Vector3d& mean, const Eigen::Matrix3d& covariance,
                                double weight);

  /// -log(weight) - log N(z | mean, covariance).
  double cost(const Eigen::Vector3d& z) const;
};

/// Colour mixture for one region. Weights sum to one.
struct Gmm {
  std::vector<GaussianComponent> components;

  /// Minimum component cost and (optionally) the index achieving it.
  double min_cost(const Eigen::Vector3d& z, int* component = nullptr) const;
};

struct GmmModel {
  Gmm foreground;
  Gmm background;

  const Gmm& region(bool foreground_region) const { return foreground_region ? foreground : background; }
};

/// Deterministic k-means over colours (farthest-point seeding, Lloyd updates).
/// Returns a cluster index per sample; k is reduced to the sample count.
std::vector<int> kmeans_assign(std::span<const Eigen::Vector3d> samples, int k, int iterations = 10);

/// Maximum-likelihood mixture from a hard assignment: per-cluster mean,
/// covariance (eigenvalues floored at `floor`) and weight = cluster share.
/// Clusters with no samples are dropped.
Gmm estimate_gmm(std::span<const Eigen::Vector3d> samples, std::span<const int> assignment,
                 double floor = kCovarianceFloor);

inline Eigen::Vector3d to_vector(const Rgb& rgb) { return {rgb[0], rgb[1], rgb[2]}; }

}  // namespace pixelprobe::seg

#endif  // PIXELPROBE_GMM_HPP
