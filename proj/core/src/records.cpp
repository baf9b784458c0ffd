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

#include "pixelprobe/records.hpp"

#include <fstream>

#include "json.hpp"
#include "pixelprobe/errors.hpp"

namespace pixelprobe::records {
namespace {

using Json = nlohmann::json;
using attack::AttackRecord;

std::vector<double> values_of(const ClassProbabilities& p) {
  return {p.values().begin(), p.values().end()};
}

}  // namespace

std::string to_json_line(const AttackRecord& r) {
  Json j;
  j["image_id"] = r.image_id;
  j["image_index"] = r.image_index;
  j["network"] = r.network;
  j["mode"] = std::string(attack::to_string(r.mode));
  j["region"] = std::string(to_string(r.region));
  j["pixels"] = r.pixels;
  j["target"] = r.target ? Json(*r.target) : Json(nullptr);
  j["seed"] = r.seed;
  if (r.error) {
    j["error"] = *r.error;
    if (!r.outcome.fitness_history.empty()) j["fitness_history"] = r.outcome.fitness_history;
    return j.dump();
  }
  const auto& o = r.outcome;
  j["success"] = o.success;
  j["original_label"] = o.original_label;
  j["final_label"] = o.final_label;
  j["final_confidence"] = o.final_confidence;
  j["generations"] = o.generations_used;
  j["stopped_early"] = o.stopped_early;
  j["fitness_history"] = o.fitness_history;
  Json changes = Json::array();
  for (const auto& c : o.modified_pixels) {
    changes.push_back({c.at.x, c.at.y, c.color[0], c.color[1], c.color[2]});
  }
  j["changes"] = std::move(changes);
  j["pre_probs"] = values_of(o.pre_probs);
  j["post_probs"] = values_of(o.post_probs);
  return j.dump();
}

AttackRecord from_json_line(std::string_view line) {
  AttackRecord r;
  try {
    const Json j = Json::parse(line);
    r.image_id = j.at("image_id").get<std::string>();
    r.image_index = j.value("image_index", std::size_t{0});
    r.network = j.value("network", std::string());
    r.mode = attack::parse_mode(j.at("mode").get<std::string>());
    r.region = parse_region(j.at("region").get<std::string>());
    r.pixels = j.at("pixels").get<int>();
    if (j.contains("target") && !j["target"].is_null()) r.target = j["target"].get<int>();
    r.seed = j.value("seed", std::uint64_t{0});
    auto& o = r.outcome;
    o.mode = r.mode;
    o.target_label = r.target;
    if (j.contains("fitness_history")) o.fitness_history = j["fitness_history"].get<std::vector<double>>();
    if (j.contains("error")) {
      r.error = j["error"].get<std::string>();
      return r;
    }
    o.success = j.at("success").get<bool>();
    o.original_label = j.at("original_label").get<int>();
    o.final_label = j.at("final_label").get<int>();
    o.final_confidence = j.at("final_confidence").get<double>();
    o.generations_used = j.at("generations").get<int>();
    o.stopped_early = j.value("stopped_early", false);
    for (const auto& c : j.at("changes")) {
      if (!c.is_array() || c.size() != 5) throw LoadError("change entries must be [x,y,r,g,b]");
      o.modified_pixels.push_back(
          {{c[0].get<int>(), c[1].get<int>()}, {c[2].get<double>(), c[3].get<double>(), c[4].get<double>()}});
    }
    o.pre_probs = ClassProbabilities(j.at("pre_probs").get<std::vector<double>>());
    o.post_probs = ClassProbabilities(j.at("post_probs").get<std::vector<double>>());
  } catch (const Json::exception& e) {
    throw LoadError(std::string("malformed record: ") + e.what());
  } catch (const ContractViolation& e) {
    throw LoadError(std::string("malformed record: ") + e.what());
  }
  return r;
}

std::vector<AttackRecord> read_records(const std::filesystem::path& path) {
  std::vector<AttackRecord> out;
  std::ifstream in(path);
  if (!in) {
    if (!std::filesystem::exists(path)) return out;
    throw LoadError("cannot open records '" + path.string() + "'");
  }
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const LoadError& e) {
      throw LoadError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<AttackRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write records '" + path.string() + "'");
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::set<std::string> record_keys(const std::vector<AttackRecord>& records) {
  std::set<std::string> keys;
  for (const auto& r : records) keys.insert(r.key());
  return keys;
}

std::vector<std::string> verify_record(const AttackRecord& record, const Image& original,
                                       const RegionMask* mask) {
  std::vector<std::string> problems;
  if (record.error) return problems;
  const auto& changes = record.outcome.modified_pixels;
  if (static_cast<int>(changes.size()) > record.pixels) {
    problems.push_back(std::to_string(changes.size()) + " pixels changed, budget is " +
                       std::to_string(record.pixels));
  }
  if (record.region != Region::whole && mask == nullptr) {
    problems.push_back("no mask available for a region-constrained record");
    return problems;
  }
  for (const auto& c : changes) {
    const std::string where = "(" + std::to_string(c.at.x) + "," + std::to_string(c.at.y) + ")";
    if (!original.contains(c.at.x, c.at.y)) {
      problems.push_back("change at " + where + " lies outside the image");
      continue;
    }
    if (record.region != Region::whole && !mask->contains(record.region, c.at.x, c.at.y)) {
      problems.push_back("change at " + where + " lies outside the " +
                         std::string(to_string(record.region)));
    }
  }
  const Image& adv = record.outcome.adversarial_image;
  if (!adv.empty()) {
    std::vector<PixelCoord> recorded;
    for (const auto& c : changes) recorded.push_back(c.at);
    if (changed_pixels(original, adv) != recorded) {
      problems.push_back("recorded changes do not match the adversarial image");
    }
  }
  return problems;
}

}  // namespace pixelprobe::records
