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

#ifndef PIXELPROBE_BUILTIN_CLASSIFIERS_HPP
#define PIXELPROBE_BUILTIN_CLASSIFIERS_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pixelprobe/image.hpp"
#include "pixelprobe/oracle.hpp"

namespace pixelprobe::oracle {

struct LabeledImage {
  Image image;
  int label = 0;
};

// Desk-scale classifiers that stand in for trained CNNs. Both see pixels
// scaled to [0, 1] and end in a softmax.
class BuiltinClassifier : public Oracle {
 public:
  const OracleDescriptor& descriptor() const override { return descriptor_; }

  /// Serialized as a JSON document readable by load_builtin().
  virtual std::string to_json() const = 0;
  void save(const std::filesystem::path& path) const;

  /// Fraction of `data` whose argmax matches the label.
  double accuracy(std::span<const LabeledImage> data) const;

 protected:
  explicit BuiltinClassifier(OracleDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

  /// Row-per-image feature matrix (pixels / 255).
  Eigen::MatrixXd features(std::span<const Image> images) const;

  OracleDescriptor descriptor_;
};

/// softmax(W x + b).
class LinearClassifier final : public BuiltinClassifier {
 public:
  LinearClassifier(InputShape shape, Eigen::MatrixXd weights, Eigen::VectorXd bias,
                   std::string name = "builtin-linear");

  std::vector<ClassProbabilities> classify_batch(std::span<const Image> images) const override;
  std::string to_json() const override;

  /// Class logits before the softmax, for analytic checks.
  Eigen::VectorXd logits(const Image& image) const;

  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }

 private:
  Eigen::MatrixXd weights_;  // K x (H*W*3)
  Eigen::VectorXd bias_;     // K
};

/// One tanh hidden layer followed by a softmax output layer.
class MlpClassifier final : public BuiltinClassifier {
 public:
  MlpClassifier(InputShape shape, Eigen::MatrixXd hidden_weights, Eigen::VectorXd hidden_bias,
                Eigen::MatrixXd output_weights, Eigen::VectorXd output_bias,
                std::string name = "builtin-mlp");

  std::vector<ClassProbabilities> classify_batch(std::span<const Image> images) const override;
  std::string to_json() const override;

  int hidden_width() const { return static_cast<int>(hidden_bias_.size()); }

 private:
  Eigen::MatrixXd hidden_weights_;  // H x n
  Eigen::VectorXd hidden_bias_;
  Eigen::MatrixXd output_weights_;  // K x H
  Eigen::VectorXd output_bias_;
};

struct TrainOptions {
  OracleKind kind = OracleKind::builtin_linear;
  std::uint64_t seed = 0;
  int hidden_width = 32;
  double l2 = 1e-3;
  // Relative decrease in the objective below which L-BFGS stops.
  double tolerance = 1e-6;
  int max_iterations = 2000;
  std::string name;
};

/// Full-batch softmax cross-entropy training with L2 weight decay, minimized by
/// L-BFGS. Deterministic for a given seed. Throws TrainingError when fewer than
/// two classes are present.
std::unique_ptr<BuiltinClassifier> train_builtin(std::span<const LabeledImage> data,
                                                 const TrainOptions& options);

std::unique_ptr<BuiltinClassifier> builtin_from_json(const std::string& json);
std::unique_ptr<BuiltinClassifier> load_builtin(const std::filesystem::path& path);

/// Row-wise numerically stable softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace pixelprobe::oracle

#endif  // PIXELPROBE_BUILTIN_CLASSIFIERS_HPP
