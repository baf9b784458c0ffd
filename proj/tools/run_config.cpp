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

#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pixelprobe/errors.hpp"

namespace pixelprobe::cli {
namespace {

using Json = nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

const std::vector<std::string> kKnownKeys = {"dataset", "masks", "trimap", "oracle", "attacks",
                                             "output",  "seed",  "samples", "jobs", "de",
                                             "grabcut"};

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw LoadError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw LoadError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      throw LoadError("unknown config key '" + key + "'");
    }
  }

  RunConfig c;
  try {
    if (j.contains("dataset")) c.dataset = resolve(base_dir, j["dataset"].get<std::string>());
    if (j.contains("masks")) c.masks = resolve(base_dir, j["masks"].get<std::string>());
    if (j.contains("output")) c.output = resolve(base_dir, j["output"].get<std::string>());
    else c.output = base_dir / c.output;
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.samples = get_or<std::size_t>(j, "samples", c.samples);
    c.jobs = get_or<int>(j, "jobs", c.jobs);

    if (j.contains("trimap")) {
      const Json& t = j["trimap"];
      if (t.contains("rect")) c.trimap.rect = t["rect"].get<std::array<int, 4>>();
      if (t.contains("dir")) c.trimap.dir = resolve(base_dir, t["dir"].get<std::string>());
      c.trimap.margin = get_or<int>(t, "margin", c.trimap.margin);
    }

    if (j.contains("oracle")) {
      const Json& o = j["oracle"];
      if (o.contains("kind")) c.oracle.kind = oracle::parse_oracle_kind(o["kind"].get<std::string>());
      if (o.contains("model")) c.oracle.model = resolve(base_dir, o["model"].get<std::string>());
      c.oracle.endpoint = get_or<std::string>(o, "endpoint", "");
    }

    if (j.contains("attacks")) {
      const Json& a = j["attacks"];
      if (a.contains("regions")) {
        c.regions.clear();
        for (const auto& r : a["regions"]) c.regions.push_back(parse_region(r.get<std::string>()));
      }
      if (a.contains("pixels")) c.pixels = a["pixels"].get<std::vector<int>>();
      if (a.contains("modes")) {
        c.modes.clear();
        for (const auto& m : a["modes"]) c.modes.push_back(attack::parse_mode(m.get<std::string>()));
      }
    }

    if (j.contains("de")) {
      const Json& d = j["de"];
      c.de.population_size = get_or<int>(d, "population", c.de.population_size);
      c.de.max_generations = get_or<int>(d, "generations", c.de.max_generations);
      c.de.crossover_rate = get_or<double>(d, "crossover", c.de.crossover_rate);
      c.de.mutation.lo = get_or<double>(d, "f_min", c.de.mutation.lo);
      c.de.mutation.hi = get_or<double>(d, "f_max", c.de.mutation.hi);
    }

    if (j.contains("grabcut")) {
      const Json& g = j["grabcut"];
      c.grabcut.components_per_region =
          get_or<int>(g, "components", c.grabcut.components_per_region);
      c.grabcut.gamma = get_or<double>(g, "gamma", c.grabcut.gamma);
      c.grabcut.iterations = get_or<int>(g, "iterations", c.grabcut.iterations);
    }
  } catch (const Json::exception& e) {
    throw LoadError(std::string("config field has the wrong type: ") + e.what());
  }

  if (c.jobs < 1) throw ContractViolation("jobs must be at least 1");
  if (c.samples == 0) throw ContractViolation("samples must be positive");
  if (c.regions.empty() || c.pixels.empty() || c.modes.empty()) {
    throw ContractViolation("attacks needs at least one region, pixel budget and mode");
  }
  for (int l : c.pixels) {
    if (l < 1) throw ContractViolation("pixel budgets must be positive");
  }
  if (c.de.population_size < 4) throw ContractViolation("de.population must be at least 4");
  if (c.de.max_generations < 1) throw ContractViolation("de.generations must be positive");
  if (c.de.crossover_rate < 0.0 || c.de.crossover_rate > 1.0) {
    throw ContractViolation("de.crossover must be in [0, 1]");
  }
  if (c.de.mutation.lo < 0.0 || c.de.mutation.lo > c.de.mutation.hi || c.de.mutation.hi > 2.0) {
    throw ContractViolation("need 0 <= de.f_min <= de.f_max <= 2");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

}  // namespace pixelprobe::cli
