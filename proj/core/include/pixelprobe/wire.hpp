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

#ifndef PIXELPROBE_WIRE_HPP
#define PIXELPROBE_WIRE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixelprobe/image.hpp"
#include "pixelprobe/oracle.hpp"

// JSON bodies of the external oracle protocol.
//
//   POST /classify  {"shape":[H,W,3],"count":N,"data_b64":"..."}
//                -> {"probs":[[p_0..p_K-1], ...N rows]}
//   GET  /meta   -> {"class_count":K,"shape":[H,W,3],"name":"..."}
//
// data_b64 is the base64 of N*H*W*3 bytes: images concatenated, each
// row-major with interleaved RGB, intensities rounded to the nearest integer.
namespace pixelprobe::wire {

inline constexpr double kSimplexTolerance = 1e-5;

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string encode_classify_request(std::span<const Image> images);

struct ClassifyRequest {
  int height = 0;
  int width = 0;
  std::vector<Image> images;
};
ClassifyRequest decode_classify_request(std::string_view body);

std::string encode_classify_response(std::span<const ClassProbabilities> probs);

/// Parses and validates a response: exactly `expected_count` rows of
/// `class_count` entries, each on the probability simplex. Violations raise
/// ProtocolError; nothing is renormalized.
std::vector<ClassProbabilities> decode_classify_response(std::string_view body,
                                                         std::size_t expected_count,
                                                         int class_count);

struct Meta {
  int class_count = 0;
  oracle::InputShape shape;
  std::string name;
};
std::string encode_meta(const Meta& meta);
Meta decode_meta(std::string_view body);

}  // namespace pixelprobe::wire

#endif  // PIXELPROBE_WIRE_HPP
