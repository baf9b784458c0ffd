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

#include "pixelprobe/wire.hpp"

#include <openssl/evp.h>

#include "json.hpp"
#include "pixelprobe/errors.hpp"
#include "pixelprobe/image_io.hpp"

namespace pixelprobe::wire {
namespace {

using Json = nlohmann::json;

Json parse(std::string_view body, const char* what) {
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

oracle::InputShape parse_shape(const Json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number_integer() || !j[1].is_number_integer() ||
      j[2] != kChannels) {
    throw ProtocolError("shape must be [H, W, 3]");
  }
  const oracle::InputShape shape{j[0].get<int>(), j[1].get<int>()};
  if (shape.height <= 0 || shape.width <= 0) throw ProtocolError("shape must be positive");
  return shape;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                      static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                      static_cast<int>(text.size()));
  if (written < 0) throw ProtocolError("malformed base64 payload");
  // EVP_DecodeBlock keeps the bytes that stand in for '=' padding.
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(written) - padding);
  return out;
}

std::string encode_classify_request(std::span<const Image> images) {
  if (images.empty()) throw ContractViolation("cannot encode an empty batch");
  const int h = images.front().height();
  const int w = images.front().width();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(images.size() * images.front().data().size());
  for (const auto& image : images) {
    if (image.height() != h || image.width() != w) {
      throw ContractViolation("all images in a batch must share one shape");
    }
    for (double v : image.data()) bytes.push_back(quantize(v));
  }
  Json j;
  j["shape"] = {h, w, kChannels};
  j["count"] = images.size();
  j["data_b64"] = base64_encode(bytes);
  return j.dump();
}

ClassifyRequest decode_classify_request(std::string_view body) {
  const Json j = parse(body, "classify request");
  ClassifyRequest req;
  try {
    const auto shape = parse_shape(j.at("shape"));
    req.height = shape.height;
    req.width = shape.width;
    const auto count = j.at("count").get<long long>();
    if (count < 1) throw ProtocolError("count must be positive");
    const auto bytes = base64_decode(j.at("data_b64").get<std::string>());
    const std::size_t per_image = static_cast<std::size_t>(shape.height) *
                                  static_cast<std::size_t>(shape.width) * kChannels;
    if (bytes.size() != per_image * static_cast<std::size_t>(count)) {
      throw ProtocolError("payload holds " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(per_image * static_cast<std::size_t>(count)));
    }
    req.images.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
      auto first = bytes.begin() + static_cast<std::ptrdiff_t>(per_image * static_cast<std::size_t>(i));
      req.images.emplace_back(shape.height, shape.width,
                              std::vector<double>(first, first + static_cast<std::ptrdiff_t>(per_image)));
    }
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string("malformed classify request: ") + e.what());
  }
  return req;
}

std::string encode_classify_response(std::span<const ClassProbabilities> probs) {
  Json rows = Json::array();
  for (const auto& p : probs) rows.push_back(std::vector<double>(p.values().begin(), p.values().end()));
  Json j;
  j["probs"] = std::move(rows);
  return j.dump();
}

std::vector<ClassProbabilities> decode_classify_response(std::string_view body,
                                                         std::size_t expected_count,
                                                         int class_count) {
  const Json j = parse(body, "classify response");
  std::vector<ClassProbabilities> out;
  try {
    const auto& rows = j.at("probs");
    if (!rows.is_array() || rows.size() != expected_count) {
      throw ProtocolError("response carries " + std::to_string(rows.size()) + " rows, expected " +
                          std::to_string(expected_count));
    }
    out.reserve(expected_count);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ClassProbabilities p(rows[i].get<std::vector<double>>());
      if (static_cast<int>(p.size()) != class_count) {
        throw ProtocolError("row " + std::to_string(i) + " has " + std::to_string(p.size()) +
                            " entries, expected " + std::to_string(class_count));
      }
      if (!p.is_simplex(kSimplexTolerance)) {
        throw ProtocolError("row " + std::to_string(i) + " is not a probability vector");
      }
      out.push_back(std::move(p));
    }
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string("malformed classify response: ") + e.what());
  }
  return out;
}

std::string encode_meta(const Meta& meta) {
  Json j;
  j["class_count"] = meta.class_count;
  j["shape"] = {meta.shape.height, meta.shape.width, kChannels};
  j["name"] = meta.name;
  return j.dump();
}

Meta decode_meta(std::string_view body) {
  const Json j = parse(body, "meta response");
  Meta meta;
  try {
    meta.class_count = j.at("class_count").get<int>();
    meta.shape = parse_shape(j.at("shape"));
    meta.name = j.value("name", std::string());
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string("malformed meta response: ") + e.what());
  }
  if (meta.class_count < 2) throw ProtocolError("class_count must be at least 2");
  return meta;
}

}  // namespace pixelprobe::wire
