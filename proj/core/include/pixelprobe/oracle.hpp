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

#ifndef PIXELPROBE_ORACLE_HPP
#define PIXELPROBE_ORACLE_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixelprobe/image.hpp"

namespace pixelprobe::oracle {

struct InputShape {
  int height = 0;
  int width = 0;
  friend bool operator==(const InputShape&, const InputShape&) = default;
};

enum class OracleKind { builtin_linear, builtin_mlp, external };

std::string_view to_string(OracleKind kind);
OracleKind parse_oracle_kind(std::string_view text);

struct OracleDescriptor {
  OracleKind kind = OracleKind::builtin_linear;
  int class_count = 0;
  InputShape shape;
  std::string endpoint;  // external only
  std::string name;
};

/// Black-box classifier: images in, class probabilities out. Implementations
/// must be safe to call from several threads at once.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual const OracleDescriptor& descriptor() const = 0;

  /// One probability vector per image, in input order.
  virtual std::vector<ClassProbabilities> classify_batch(std::span<const Image> images) const = 0;

  int class_count() const { return descriptor().class_count; }
  InputShape input_shape() const { return descriptor().shape; }
  const std::string& name() const { return descriptor().name; }

  ClassProbabilities classify(const Image& image) const;

 protected:
  /// Throws ContractViolation if any image does not match input_shape().
  void require_input_shape(std::span<const Image> images) const;
};

}  // namespace pixelprobe::oracle

#endif  // PIXELPROBE_ORACLE_HPP
