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

#include "pixelprobe/oracle.hpp"

#include <string>

#include "pixelprobe/errors.hpp"

namespace pixelprobe::oracle {

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::builtin_linear: return "builtin-linear";
    case OracleKind::builtin_mlp: return "builtin-mlp";
    case OracleKind::external: return "external";
  }
  return "external";
}

OracleKind parse_oracle_kind(std::string_view text) {
  if (text == "builtin-linear") return OracleKind::builtin_linear;
  if (text == "builtin-mlp") return OracleKind::builtin_mlp;
  if (text == "external") return OracleKind::external;
  throw ContractViolation("unknown oracle kind '" + std::string(text) + "'");
}

ClassProbabilities Oracle::classify(const Image& image) const {
  auto probs = classify_batch(std::span<const Image>(&image, 1));
  return std::move(probs.front());
}

void Oracle::require_input_shape(std::span<const Image> images) const {
  const InputShape shape = input_shape();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].height() != shape.height || images[i].width() != shape.width) {
      throw ContractViolation("image " + std::to_string(i) + " is " +
                              std::to_string(images[i].height()) + "x" +
                              std::to_string(images[i].width()) + ", oracle expects " +
                              std::to_string(shape.height) + "x" + std::to_string(shape.width));
    }
  }
}

}  // namespace pixelprobe::oracle
