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

#include "pixelprobe/builtin_classifiers.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pixelprobe/errors.hpp"

namespace pixelprobe::oracle {
namespace {

using Json = nlohmann::json;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t feature_count(InputShape shape) {
  return static_cast<std::size_t>(shape.height) * static_cast<std::size_t>(shape.width) * kChannels;
}

OracleDescriptor make_descriptor(OracleKind kind, InputShape shape, int classes, std::string name) {
  if (classes < 2) throw ContractViolation("a classifier needs at least two classes");
  if (shape.height <= 0 || shape.width <= 0) throw ContractViolation("input shape must be positive");
  return {kind, classes, shape, {}, std::move(name)};
}

std::vector<ClassProbabilities> rows_to_probabilities(const Eigen::MatrixXd& probs) {
  std::vector<ClassProbabilities> out;
  out.reserve(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(probs.cols()));
    for (Eigen::Index k = 0; k < probs.cols(); ++k) row[static_cast<std::size_t>(k)] = probs(i, k);
    out.emplace_back(std::move(row));
  }
  return out;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw LoadError("ragged weight matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Mean cross-entropy of row-wise logits against integer labels. Writes the
// logit gradient (P - Y) / N into `grad_logits`.
double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                     Eigen::MatrixXd& grad_logits) {
  const auto n = static_cast<double>(logits.rows());
  grad_logits = softmax_rows(logits);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    const double lse = max + std::log((logits.row(i).array() - max).exp().sum());
    const int y = labels[static_cast<std::size_t>(i)];
    loss += lse - logits(i, y);
    grad_logits(i, y) -= 1.0;
  }
  grad_logits /= n;
  return loss / n;
}

class LinearObjective final : public ceres::FirstOrderFunction {
 public:
  LinearObjective(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes, double l2)
      : x_(x), labels_(labels), classes_(classes), l2_(l2) {}

  int NumParameters() const override {
    return classes_ * static_cast<int>(x_.cols()) + classes_;
  }

  bool Evaluate(const double* params, double* cost, double* gradient) const override {
    const auto n = x_.cols();
    Eigen::Map<const RowMajorMatrix> w(params, classes_, n);
    Eigen::Map<const Eigen::VectorXd> b(params + classes_ * n, classes_);
    Eigen::MatrixXd logits = x_ * w.transpose();
    logits.rowwise() += b.transpose();
    Eigen::MatrixXd g;
    *cost = cross_entropy(logits, labels_, g) + 0.5 * l2_ * w.squaredNorm();
    if (gradient != nullptr) {
      Eigen::Map<RowMajorMatrix> gw(gradient, classes_, n);
      Eigen::Map<Eigen::VectorXd> gb(gradient + classes_ * n, classes_);
      gw = g.transpose() * x_ + l2_ * w;
      gb = g.colwise().sum().transpose();
    }
    return true;
  }

 private:
  const Eigen::MatrixXd& x_;
  const std::vector<int>& labels_;
  int classes_;
  double l2_;
};

class MlpObjective final : public ceres::FirstOrderFunction {
 public:
  MlpObjective(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes, int hidden,
               double l2)
      : x_(x), labels_(labels), classes_(classes), hidden_(hidden), l2_(l2) {}

  int NumParameters() const override {
    return hidden_ * static_cast<int>(x_.cols()) + hidden_ + classes_ * hidden_ + classes_;
  }

  bool Evaluate(const double* params, double* cost, double* gradient) const override {
    const auto n = x_.cols();
    const double* p = params;
    Eigen::Map<const RowMajorMatrix> w1(p, hidden_, n);
    p += hidden_ * n;
    Eigen::Map<const Eigen::VectorXd> b1(p, hidden_);
    p += hidden_;
    Eigen::Map<const RowMajorMatrix> w2(p, classes_, hidden_);
    p += classes_ * hidden_;
    Eigen::Map<const Eigen::VectorXd> b2(p, classes_);

    Eigen::MatrixXd pre = x_ * w1.transpose();
    pre.rowwise() += b1.transpose();
    const Eigen::MatrixXd act = pre.array().tanh().matrix();
    Eigen::MatrixXd logits = act * w2.transpose();
    logits.rowwise() += b2.transpose();
    Eigen::MatrixXd g;
    *cost = cross_entropy(logits, labels_, g) +
            0.5 * l2_ * (w1.squaredNorm() + w2.squaredNorm());
    if (gradient != nullptr) {
      double* q = gradient;
      Eigen::Map<RowMajorMatrix> gw1(q, hidden_, n);
      q += hidden_ * n;
      Eigen::Map<Eigen::VectorXd> gb1(q, hidden_);
      q += hidden_;
      Eigen::Map<RowMajorMatrix> gw2(q, classes_, hidden_);
      q += classes_ * hidden_;
      Eigen::Map<Eigen::VectorXd> gb2(q, classes_);

      gw2 = g.transpose() * act + l2_ * w2;
      gb2 = g.colwise().sum().transpose();
      const Eigen::MatrixXd dact = g * w2;
      const Eigen::MatrixXd dpre = (dact.array() * (1.0 - act.array().square())).matrix();
      gw1 = dpre.transpose() * x_ + l2_ * w1;
      gb1 = dpre.colwise().sum().transpose();
    }
    return true;
  }

 private:
  const Eigen::MatrixXd& x_;
  const std::vector<int>& labels_;
  int classes_;
  int hidden_;
  double l2_;
};

void minimize(ceres::FirstOrderFunction* objective, std::vector<double>& params,
              const TrainOptions& options) {
  ceres::GradientProblem problem(objective);
  ceres::GradientProblemSolver::Options solver;
  solver.line_search_direction_type = ceres::LBFGS;
  solver.function_tolerance = options.tolerance;
  solver.gradient_tolerance = options.tolerance * 1e-4;
  solver.parameter_tolerance = 1e-12;
  solver.max_num_iterations = options.max_iterations;
  solver.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(solver, problem, params.data(), &summary);
  if (summary.termination_type == ceres::FAILURE) {
    throw TrainingError("L-BFGS failed: " + summary.message);
  }
}

}  // namespace

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - max).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

void BuiltinClassifier::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write model '" + path.string() + "'");
  out << to_json() << '\n';
}

double BuiltinClassifier::accuracy(std::span<const LabeledImage> data) const {
  if (data.empty()) return 0.0;
  std::vector<Image> images;
  images.reserve(data.size());
  for (const auto& d : data) images.push_back(d.image);
  const auto probs = classify_batch(images);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (probs[i].argmax() == data[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Eigen::MatrixXd BuiltinClassifier::features(std::span<const Image> images) const {
  require_input_shape(images);
  const auto n = static_cast<Eigen::Index>(feature_count(input_shape()));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(images.size()), n);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto data = images[i].data();
    x.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(data.data(), n) / kMaxIntensity;
  }
  return x;
}

LinearClassifier::LinearClassifier(InputShape shape, Eigen::MatrixXd weights, Eigen::VectorXd bias,
                                   std::string name)
    : BuiltinClassifier(make_descriptor(OracleKind::builtin_linear, shape,
                                        static_cast<int>(bias.size()), std::move(name))),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (weights_.rows() != bias_.size() ||
      static_cast<std::size_t>(weights_.cols()) != feature_count(shape)) {
    throw ContractViolation("linear classifier weights do not match shape/class count");
  }
}

std::vector<ClassProbabilities> LinearClassifier::classify_batch(
    std::span<const Image> images) const {
  Eigen::MatrixXd logits = features(images) * weights_.transpose();
  logits.rowwise() += bias_.transpose();
  return rows_to_probabilities(softmax_rows(logits));
}

Eigen::VectorXd LinearClassifier::logits(const Image& image) const {
  return features(std::span<const Image>(&image, 1)).row(0) * weights_.transpose() +
         bias_.transpose();
}

std::string LinearClassifier::to_json() const {
  Json j;
  j["kind"] = std::string(oracle::to_string(OracleKind::builtin_linear));
  j["name"] = name();
  j["shape"] = {input_shape().height, input_shape().width, kChannels};
  j["class_count"] = class_count();
  j["weights"] = matrix_to_json(weights_);
  j["bias"] = vector_to_json(bias_);
  return j.dump();
}

MlpClassifier::MlpClassifier(InputShape shape, Eigen::MatrixXd hidden_weights,
                             Eigen::VectorXd hidden_bias, Eigen::MatrixXd output_weights,
                             Eigen::VectorXd output_bias, std::string name)
    : BuiltinClassifier(make_descriptor(OracleKind::builtin_mlp, shape,
                                        static_cast<int>(output_bias.size()), std::move(name))),
      hidden_weights_(std::move(hidden_weights)),
      hidden_bias_(std::move(hidden_bias)),
      output_weights_(std::move(output_weights)),
      output_bias_(std::move(output_bias)) {
  if (hidden_weights_.rows() != hidden_bias_.size() ||
      static_cast<std::size_t>(hidden_weights_.cols()) != feature_count(shape) ||
      output_weights_.rows() != output_bias_.size() ||
      output_weights_.cols() != hidden_bias_.size()) {
    throw ContractViolation("MLP weights do not match shape/class count");
  }
}

std::vector<ClassProbabilities> MlpClassifier::classify_batch(std::span<const Image> images) const {
  Eigen::MatrixXd pre = features(images) * hidden_weights_.transpose();
  pre.rowwise() += hidden_bias_.transpose();
  Eigen::MatrixXd logits = pre.array().tanh().matrix() * output_weights_.transpose();
  logits.rowwise() += output_bias_.transpose();
  return rows_to_probabilities(softmax_rows(logits));
}

std::string MlpClassifier::to_json() const {
  Json j;
  j["kind"] = std::string(oracle::to_string(OracleKind::builtin_mlp));
  j["name"] = name();
  j["shape"] = {input_shape().height, input_shape().width, kChannels};
  j["class_count"] = class_count();
  j["hidden_weights"] = matrix_to_json(hidden_weights_);
  j["hidden_bias"] = vector_to_json(hidden_bias_);
  j["output_weights"] = matrix_to_json(output_weights_);
  j["output_bias"] = vector_to_json(output_bias_);
  return j.dump();
}

std::unique_ptr<BuiltinClassifier> train_builtin(std::span<const LabeledImage> data,
                                                 const TrainOptions& options) {
  if (data.empty()) throw TrainingError("empty training set");
  if (options.kind == OracleKind::external) throw TrainingError("cannot train an external oracle");
  const InputShape shape{data.front().image.height(), data.front().image.width()};

  std::set<int> distinct;
  int classes = 0;
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const auto& d : data) {
    if (d.label < 0) throw TrainingError("negative class label");
    if (d.image.height() != shape.height || d.image.width() != shape.width) {
      throw TrainingError("training images differ in shape");
    }
    distinct.insert(d.label);
    classes = std::max(classes, d.label + 1);
    labels.push_back(d.label);
  }
  if (distinct.size() < 2) throw TrainingError("training set contains a single class");

  const auto n = static_cast<Eigen::Index>(feature_count(shape));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), n);
  for (std::size_t i = 0; i < data.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(data[i].image.data().data(), n) / kMaxIntensity;
  }

  if (options.kind == OracleKind::builtin_linear) {
    std::vector<double> params(static_cast<std::size_t>(classes * n + classes), 0.0);
    minimize(new LinearObjective(x, labels, classes, options.l2), params, options);
    Eigen::MatrixXd w = Eigen::Map<const RowMajorMatrix>(params.data(), classes, n);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(params.data() + classes * n, classes);
    return std::make_unique<LinearClassifier>(
        shape, std::move(w), std::move(b),
        options.name.empty() ? std::string("builtin-linear") : options.name);
  }

  const int hidden = options.hidden_width;
  if (hidden < 1) throw TrainingError("hidden width must be positive");
  std::mt19937_64 rng(options.seed);
  std::vector<double> params(
      static_cast<std::size_t>(hidden * n + hidden + classes * hidden + classes), 0.0);
  {
    std::normal_distribution<double> in_dist(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
    std::normal_distribution<double> out_dist(0.0, 1.0 / std::sqrt(static_cast<double>(hidden)));
    double* p = params.data();
    for (Eigen::Index i = 0; i < hidden * n; ++i) *p++ = in_dist(rng);
    p += hidden;
    for (int i = 0; i < classes * hidden; ++i) *p++ = out_dist(rng);
  }
  minimize(new MlpObjective(x, labels, classes, hidden, options.l2), params, options);
  const double* p = params.data();
  Eigen::MatrixXd w1 = Eigen::Map<const RowMajorMatrix>(p, hidden, n);
  p += hidden * n;
  Eigen::VectorXd b1 = Eigen::Map<const Eigen::VectorXd>(p, hidden);
  p += hidden;
  Eigen::MatrixXd w2 = Eigen::Map<const RowMajorMatrix>(p, classes, hidden);
  p += classes * hidden;
  Eigen::VectorXd b2 = Eigen::Map<const Eigen::VectorXd>(p, classes);
  return std::make_unique<MlpClassifier>(
      shape, std::move(w1), std::move(b1), std::move(w2), std::move(b2),
      options.name.empty() ? std::string("builtin-mlp") : options.name);
}

std::unique_ptr<BuiltinClassifier> builtin_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
    const auto shape_values = j.at("shape").get<std::vector<int>>();
    if (shape_values.size() != 3 || shape_values[2] != kChannels) {
      throw LoadError("model shape must be [H, W, 3]");
    }
    const InputShape shape{shape_values[0], shape_values[1]};
    const auto kind = parse_oracle_kind(j.at("kind").get<std::string>());
    const auto name = j.value("name", std::string(oracle::to_string(kind)));
    if (kind == OracleKind::builtin_linear) {
      return std::make_unique<LinearClassifier>(shape, matrix_from_json(j.at("weights")),
                                                vector_from_json(j.at("bias")), name);
    }
    if (kind == OracleKind::builtin_mlp) {
      return std::make_unique<MlpClassifier>(
          shape, matrix_from_json(j.at("hidden_weights")), vector_from_json(j.at("hidden_bias")),
          matrix_from_json(j.at("output_weights")), vector_from_json(j.at("output_bias")), name);
    }
  } catch (const Json::exception& e) {
    throw LoadError(std::string("malformed model document: ") + e.what());
  } catch (const ContractViolation& e) {
    throw LoadError(std::string("inconsistent model document: ") + e.what());
  }
  throw LoadError("model document is not a builtin classifier");
}

std::unique_ptr<BuiltinClassifier> load_builtin(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open model '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return builtin_from_json(buffer.str());
}

}  // namespace pixelprobe::oracle
