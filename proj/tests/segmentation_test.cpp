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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "pixelprobe/errors.hpp"
#include "pixelprobe/image_io.hpp"
#include "pixelprobe/max_flow.hpp"
#include "pixelprobe/segmentation.hpp"
#include "pixelprobe/synthetic.hpp"
#include "support/cut_oracle.hpp"

namespace pixelprobe::seg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(MaxFlow, TwoNodeHandExample) {
  MaxFlowGraph g(2);
  g.add_terminal_edges(0, 3.0, 2.0);
  g.add_terminal_edges(1, 2.0, 3.0);
  g.add_edge(0, 1, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(g.solve(), 5.0);
  EXPECT_FALSE(g.on_source_side(0));
  EXPECT_FALSE(g.on_source_side(1));
}

TEST(MaxFlow, BottleneckInTheMiddle) {
  // s -> 0 (10), 0 -> 1 (1), 1 -> t (10): cut is the middle edge.
  MaxFlowGraph g(2);
  g.add_terminal_edges(0, 10.0, 0.0);
  g.add_terminal_edges(1, 0.0, 10.0);
  g.add_edge(0, 1, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(g.solve(), 1.0);
  EXPECT_TRUE(g.on_source_side(0));
  EXPECT_FALSE(g.on_source_side(1));
}

TEST(MaxFlow, InfiniteTerminalPinsNode) {
  MaxFlowGraph g(1);
  g.add_terminal_edges(0, kInf, 4.0);
  EXPECT_DOUBLE_EQ(g.solve(), 4.0);
  EXPECT_TRUE(g.on_source_side(0));
}

TEST(MaxFlow, RejectsBadInput) {
  MaxFlowGraph g(2);
  EXPECT_THROW(g.add_terminal_edges(2, 1.0, 1.0), ContractViolation);
  EXPECT_THROW(g.add_edge(0, 0, 1.0, 1.0), ContractViolation);
  EXPECT_THROW(g.add_edge(0, 1, -1.0, 1.0), ContractViolation);
  MaxFlowGraph joined(1);
  joined.add_terminal_edges(0, kInf, kInf);
  EXPECT_THROW(joined.solve(), ContractViolation);
}

TEST(Gaussian, CostAtMahalanobisDistanceTwo) {
  const auto c = GaussianComponent::make(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity(), 1.0);
  const double expected = 2.0 + 1.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(c.cost({2.0, 0.0, 0.0}), expected, 1e-12);
  EXPECT_NEAR(c.cost({0.0, 1.2, 1.6}), expected, 1e-12);
  const auto half = GaussianComponent::make(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity(), 0.5);
  EXPECT_NEAR(half.cost({2.0, 0.0, 0.0}), expected + std::log(2.0), 1e-12);
}

TEST(Gaussian, ScaledCovarianceAddsLogDeterminant) {
  const auto c = GaussianComponent::make(Eigen::Vector3d(10, 20, 30),
                                         4.0 * Eigen::Matrix3d::Identity(), 1.0);
  // d^2 = 16/4 = 4, log det = 3 log 4.
  const double expected = 2.0 + 1.5 * std::log(2.0 * std::numbers::pi) + 1.5 * std::log(4.0);
  EXPECT_NEAR(c.cost({14.0, 20.0, 30.0}), expected, 1e-12);
}

TEST(Gmm, SolidColourSingleComponentUsesFloor) {
  const std::vector<Eigen::Vector3d> samples(20, Eigen::Vector3d(40, 50, 60));
  const std::vector<int> assignment(samples.size(), 0);
  const Gmm g = estimate_gmm(samples, assignment);
  ASSERT_EQ(g.components.size(), 1u);
  EXPECT_EQ(g.components[0].mean, Eigen::Vector3d(40, 50, 60));
  EXPECT_TRUE(g.components[0].covariance.isApprox(kCovarianceFloor * Eigen::Matrix3d::Identity()));
  EXPECT_DOUBLE_EQ(g.components[0].weight, 1.0);
}

TEST(Gmm, TwoColourKMeansRecoversMeans) {
  std::vector<Eigen::Vector3d> samples;
  for (int i = 0; i < 30; ++i) samples.emplace_back(200.0 + (i % 3), 10.0, 10.0);
  for (int i = 0; i < 10; ++i) samples.emplace_back(5.0, 5.0, 180.0 + (i % 2));
  const auto assignment = kmeans_assign(samples, 2);
  const Gmm g = estimate_gmm(samples, assignment);
  ASSERT_EQ(g.components.size(), 2u);
  std::vector<double> weights;
  for (const auto& c : g.components) {
    if (c.mean.x() > 100.0) {
      EXPECT_NEAR(c.mean.x(), 201.0, 1e-9);
      EXPECT_NEAR(c.weight, 0.75, 1e-12);
    } else {
      EXPECT_NEAR(c.mean.z(), 180.5, 1e-9);
      EXPECT_NEAR(c.weight, 0.25, 1e-12);
    }
  }
}

TEST(Gmm, KMeansReducesKToSampleCount) {
  const std::vector<Eigen::Vector3d> samples{{0, 0, 0}, {100, 100, 100}};
  const auto a = kmeans_assign(samples, 5);
  EXPECT_NE(a[0], a[1]);
  EXPECT_THROW(kmeans_assign({}, 2), ContractViolation);
}

TEST(Smoothness, TwoPixelExample) {
  Image image(1, 2);
  image.set_pixel(1, 0, {10.0, 0.0, 0.0});
  GrabcutParams p;
  p.gamma = 50.0;
  const auto s = smoothness_term(image, p);
  EXPECT_DOUBLE_EQ(s.beta, 1.0 / 200.0);
  ASSERT_EQ(s.edges.size(), 1u);
  EXPECT_NEAR(s.edges[0].weight, 50.0 * std::exp(-0.5), 1e-12);
}

TEST(Smoothness, UniformImageHasZeroBetaAndEightConnectivity) {
  const Image image(3, 3, std::vector<double>(27, 77.0));
  GrabcutParams p;
  p.gamma = 7.0;
  const auto s = smoothness_term(image, p);
  EXPECT_EQ(s.beta, 0.0);
  // 6 horizontal + 6 vertical + 8 diagonal pairs.
  ASSERT_EQ(s.edges.size(), 20u);
  for (const auto& e : s.edges) EXPECT_EQ(e.weight, 7.0);
}

TEST(Trimap, RectangleAndGrayConversions) {
  const auto t = Trimap::from_rectangle(4, 5, 1, 1, 9, 3);
  EXPECT_EQ(t.count(TrimapLabel::unknown), 8u);
  EXPECT_EQ(t.at(0, 0), TrimapLabel::background);
  EXPECT_EQ(t.at(4, 2), TrimapLabel::unknown);
  GrayImage g{1, 4, {0, 100, 128, 250}};
  const auto u = Trimap::from_gray(g);
  EXPECT_EQ(u.at(0, 0), TrimapLabel::background);
  EXPECT_EQ(u.at(1, 0), TrimapLabel::unknown);
  EXPECT_EQ(u.at(2, 0), TrimapLabel::unknown);
  EXPECT_EQ(u.at(3, 0), TrimapLabel::foreground);
}

TEST(MinCut, MatchesBruteForceOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = testing::random_cut_instance(seed, 10);
    const auto labels = min_cut(inst.data, inst.smooth.edges, inst.trimap);
    const double got = testing::direct_energy(labels, inst.data, inst.smooth.edges);
    const double best = testing::brute_force_min_energy(inst.data, inst.smooth.edges, inst.trimap);
    EXPECT_NEAR(got, best, 1e-9) << "seed " << seed;
    EXPECT_NEAR(labeling_energy(labels, inst.data, inst.smooth.edges), got, 1e-9);
  }
}

TEST(MinCut, RespectsPins) {
  DataTerms d;
  // Both pixels strongly prefer the opposite of their pin.
  d.foreground = {100.0, 0.0};
  d.background = {0.0, 100.0};
  const Trimap t(1, 2, {TrimapLabel::foreground, TrimapLabel::background});
  const auto labels = min_cut(d, {}, t);
  EXPECT_EQ(labels, (std::vector<std::uint8_t>{1, 0}));
}

TEST(MinCut, ZeroSmoothnessDecomposesPerPixel) {
  const auto inst = testing::random_cut_instance(99, 12);
  std::vector<NeighborEdge> zero = inst.smooth.edges;
  for (auto& e : zero) e.weight = 0.0;
  const auto labels = min_cut(inst.data, zero, inst.trimap);
  const auto pins = inst.trimap.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (pins[i] == TrimapLabel::unknown) {
      EXPECT_EQ(labels[i], inst.data.foreground[i] < inst.data.background[i] ? 1 : 0) << i;
    } else {
      EXPECT_EQ(labels[i], pins[i] == TrimapLabel::foreground ? 1 : 0);
    }
  }
}

TEST(Grabcut, SegmentsSyntheticShapes) {
  const auto samples = synthetic::shape_samples(6, 17);
  double total = 0.0;
  for (const auto& s : samples) {
    const auto r = grabcut(s.image, s.trimap);
    EXPECT_FALSE(r.degenerate);
    ASSERT_EQ(r.energies.size(), static_cast<std::size_t>(r.iterations));
    for (std::size_t i = 1; i < r.energies.size(); ++i) {
      EXPECT_LE(r.energies[i], r.energies[i - 1] + 1e-9 * std::abs(r.energies[i - 1]));
    }
    total += synthetic::iou(r.mask, s.truth);
  }
  EXPECT_GE(total / static_cast<double>(samples.size()), 0.95);
}

TEST(Grabcut, RejectsUnusableTrimaps) {
  const Image image(6, 6, std::vector<double>(108, 10.0));
  EXPECT_THROW(grabcut(image, Trimap::from_rectangle(6, 6, 0, 0, 6, 6)), ContractViolation);
  EXPECT_THROW(grabcut(image, Trimap(6, 6)), ContractViolation);
  GrabcutParams p;
  p.iterations = 0;
  EXPECT_THROW(grabcut(image, Trimap::from_rectangle(6, 6, 1, 1, 4, 4), p), ContractViolation);
  EXPECT_THROW(grabcut(image, Trimap::from_rectangle(5, 6, 1, 1, 4, 4)), ContractViolation);
}

TEST(Masks, RoundTripAndSizeCheck) {
  const auto dir = std::filesystem::temp_directory_path() / "pixelprobe_mask_test";
  std::filesystem::create_directories(dir);
  RegionMask m(3, 5);
  m.set_foreground(4, 2, true);
  m.set_foreground(0, 0, true);
  write_mask_png(dir / "m.png", m);
  EXPECT_EQ(load_mask(dir / "m.png", 3, 5), m);
  EXPECT_THROW(load_mask(dir / "m.png", 5, 3), LoadError);
  EXPECT_THROW(load_mask(dir / "missing.png", 3, 5), LoadError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pixelprobe::seg
