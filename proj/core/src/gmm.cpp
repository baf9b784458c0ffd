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

#include "pixelprobe/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pixelprobe/errors.hpp"

namespace pixelprobe::seg {
namespace {
const double kLogTwoPiTerm = 1.5 * std::log(2.0 * std::numbers::pi);
}

GaussianComponent GaussianComponent::make(const Eigen::Vector3d& mean,
                                          const Eigen::Matrix3d& covariance, double weight) {
  GaussianComponent c;
  c.mean = mean;
  c.covariance = covariance;
  c.weight = weight;
  Eigen::LLT<Eigen::Matrix3d> llt(covariance);
  if (llt.info() != Eigen::Success) throw ContractViolation("covariance is not positive definite");
  c.inverse = llt.solve(Eigen::Matrix3d::Identity());
  const auto& l = llt.matrixL();
  c.log_det = 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)) + std::log(l(2, 2)));
  return c;
}

double GaussianComponent::cost(const Eigen::Vector3d& z) const {
  const Eigen::Vector3d d = z - mean;
  return -std::log(weight) + kLogTwoPiTerm + 0.5 * log_det + 0.5 * d.dot(inverse * d);
}

double Gmm::min_cost(const Eigen::Vector3d& z, int* component) const {
  double best = std::numeric_limits<double>::infinity();
  int arg = -1;
  for (std::size_t k = 0; k < components.size(); ++k) {
    const double c = components[k].cost(z);
    if (c < best) {
      best = c;
      arg = static_cast<int>(k);
    }
  }
  if (component != nullptr) *component = arg;
  return best;
}

std::vector<int> kmeans_assign(std::span<const Eigen::Vector3d> samples, int k, int iterations) {
  if (samples.empty()) throw ContractViolation("k-means over an empty sample set");
  if (k < 1) throw ContractViolation("k-means needs k >= 1");
  const std::size_t n = samples.size();
  const std::size_t clusters = std::min<std::size_t>(static_cast<std::size_t>(k), n);

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(n);

  // Farthest-point seeding from the sample nearest the mean.
  std::vector<Eigen::Vector3d> centers;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if ((samples[i] - mean).squaredNorm() < (samples[first] - mean).squaredNorm()) first = i;
  }
  centers.push_back(samples[first]);
  while (centers.size() < clusters) {
    std::size_t far = 0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (samples[i] - centers.back()).squaredNorm());
      if (nearest[i] > nearest[far]) far = i;
    }
    centers.push_back(samples[far]);
  }

  std::vector<int> assignment(n, 0);
  for (int it = 0; it < std::max(iterations, 1); ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (samples[i] - centers[0]).squaredNorm();
      for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = (samples[i] - centers[c]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (assignment[i] != best) changed = true;
      assignment[i] = best;
    }
    std::vector<Eigen::Vector3d> sums(centers.size(), Eigen::Vector3d::Zero());
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(assignment[i])] += samples[i];
      ++counts[static_cast<std::size_t>(assignment[i])];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] > 0) centers[c] = sums[c] / static_cast<double>(counts[c]);
    }
    if (!changed && it > 0) break;
  }
  return assignment;
}

Gmm estimate_gmm(std::span<const Eigen::Vector3d> samples, std::span<const int> assignment,
                 double floor) {
  if (samples.size() != assignment.size() || samples.empty()) {
    throw ContractViolation("GMM estimation needs one assignment per sample");
  }
  const int clusters = *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<Eigen::Vector3d> sums(static_cast<std::size_t>(clusters), Eigen::Vector3d::Zero());
  std::vector<std::size_t> counts(static_cast<std::size_t>(clusters), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sums[static_cast<std::size_t>(assignment[i])] += samples[i];
    ++counts[static_cast<std::size_t>(assignment[i])];
  }
  std::vector<Eigen::Matrix3d> scatter(static_cast<std::size_t>(clusters), Eigen::Matrix3d::Zero());
  std::vector<Eigen::Vector3d> means(static_cast<std::size_t>(clusters));
  for (std::size_t c = 0; c < means.size(); ++c) {
    means[c] = counts[c] ? Eigen::Vector3d(sums[c] / static_cast<double>(counts[c]))
                         : Eigen::Vector3d::Zero();
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    const Eigen::Vector3d d = samples[i] - means[c];
    scatter[c] += d * d.transpose();
  }

  Gmm gmm;
  const double total = static_cast<double>(samples.size());
  for (std::size_t c = 0; c < means.size(); ++c) {
    if (counts[c] == 0) continue;
    const Eigen::Matrix3d cov = scatter[c] / static_cast<double>(counts[c]);
    // Closest admissible covariance to the ML estimate: floor the spectrum.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d values = eig.eigenvalues().cwiseMax(floor);
    const Eigen::Matrix3d regularized =
        eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    gmm.components.push_back(GaussianComponent::make(
        means[c], 0.5 * (regularized + regularized.transpose()),
        static_cast<double>(counts[c]) / total));
  }
  return gmm;
}

}  // namespace pixelprobe::seg
