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

#ifndef PIXELPROBE_TESTS_TEST_ORACLES_HPP
#define PIXELPROBE_TESTS_TEST_ORACLES_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pixelprobe/attack.hpp"
#include "pixelprobe/builtin_classifiers.hpp"
#include "pixelprobe/errors.hpp"
#include "pixelprobe/oracle.hpp"

namespace pixelprobe::testing {

inline oracle::OracleDescriptor descriptor_for(int height, int width, int classes,
                                               std::string name) {
  oracle::OracleDescriptor d;
  d.kind = oracle::OracleKind::external;
  d.class_count = classes;
  d.shape = {height, width};
  d.name = std::move(name);
  return d;
}

// Same distribution for every image.
class ConstantOracle final : public oracle::Oracle {
 public:
  ConstantOracle(int height, int width, std::vector<double> probs)
      : descriptor_(descriptor_for(height, width, static_cast<int>(probs.size()), "constant")),
        probs_(std::move(probs)) {}

  const oracle::OracleDescriptor& descriptor() const override { return descriptor_; }
  std::vector<ClassProbabilities> classify_batch(std::span<const Image> images) const override {
    require_input_shape(images);
    return std::vector<ClassProbabilities>(images.size(), ClassProbabilities(probs_));
  }

 private:
  oracle::OracleDescriptor descriptor_;
  std::vector<double> probs_;
};

// Three classes driven by s = brightness (channel mean / 255) of the brightest
// pixel: logits (0.5, 2s, 3s). Class 1 can never win (3s >= 2s), while class 2
// takes over as soon as one pixel is bright enough. P(class 1) peaks at
// s = (ln 2 + 0.5) / 3, where class 2 already leads.
class BrightestPixelOracle final : public oracle::Oracle {
 public:
  BrightestPixelOracle(int height, int width)
      : descriptor_(descriptor_for(height, width, 3, "brightest-pixel")) {}

  const oracle::OracleDescriptor& descriptor() const override { return descriptor_; }
  std::vector<ClassProbabilities> classify_batch(std::span<const Image> images) const override {
    require_input_shape(images);
    std::vector<ClassProbabilities> out;
    for (const auto& image : images) {
      double s = 0.0;
      for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
          const Rgb p = image.pixel(x, y);
          s = std::max(s, (p[0] + p[1] + p[2]) / (3.0 * kMaxIntensity));
        }
      }
      const double l[3] = {0.5, 2.0 * s, 3.0 * s};
      const double m = std::max({l[0], l[1], l[2]});
      double z = 0.0;
      for (double v : l) z += std::exp(v - m);
      out.emplace_back(std::vector<double>{std::exp(l[0] - m) / z, std::exp(l[1] - m) / z,
                                           std::exp(l[2] - m) / z});
    }
    return out;
  }

 private:
  oracle::OracleDescriptor descriptor_;
};

// Delegates to another oracle and throws `Error` once `fail_after` batches have
// been answered.
template <typename Error>
class FailingOracle final : public oracle::Oracle {
 public:
  FailingOracle(const oracle::Oracle& inner, int fail_after)
      : inner_(inner), fail_after_(fail_after) {}

  const oracle::OracleDescriptor& descriptor() const override { return inner_.descriptor(); }
  std::vector<ClassProbabilities> classify_batch(std::span<const Image> images) const override {
    if (calls_++ >= fail_after_) throw Error("injected oracle failure");
    return inner_.classify_batch(images);
  }

 private:
  const oracle::Oracle& inner_;
  int fail_after_;
  mutable std::atomic<int> calls_{0};
};

inline std::unique_ptr<oracle::LinearClassifier> linear_oracle(int height, int width,
                                                               Eigen::MatrixXd weights,
                                                               Eigen::VectorXd bias) {
  return std::make_unique<oracle::LinearClassifier>(oracle::InputShape{height, width},
                                                    std::move(weights), std::move(bias),
                                                    "linear-test");
}

// Region confinement of one outcome: every changed pixel lies in the attacked
// region and there are at most `pixels` of them. Returns a description of the
// first violation, or an empty string.
inline std::string confinement_violation(const attack::AttackOutcome& outcome,
                                         const Image& original, const RegionMask* mask,
                                         Region region, int pixels) {
  const auto changed = changed_pixels(original, outcome.adversarial_image);
  if (static_cast<int>(changed.size()) > pixels) {
    return std::to_string(changed.size()) + " pixels changed, budget " + std::to_string(pixels);
  }
  for (const auto& p : changed) {
    if (region != Region::whole && (mask == nullptr || !mask->contains(region, p.x, p.y))) {
      return "pixel (" + std::to_string(p.x) + "," + std::to_string(p.y) +
             ") changed outside the attacked region";
    }
  }
  if (changed.size() != outcome.modified_pixels.size()) {
    return "modified_pixels does not list every changed pixel";
  }
  return {};
}

}  // namespace pixelprobe::testing

#endif  // PIXELPROBE_TESTS_TEST_ORACLES_HPP
