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

#ifndef PIXELPROBE_TOOLS_RUN_CONFIG_HPP
#define PIXELPROBE_TOOLS_RUN_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pixelprobe/attack.hpp"
#include "pixelprobe/oracle.hpp"
#include "pixelprobe/segmentation.hpp"

namespace pixelprobe::cli {

// How the segment command builds each image's trimap.
struct TrimapSpec {
  // Exactly one of these is used, checked in this order.
  std::optional<std::array<int, 4>> rect;  // x0, y0, x1, y1 (half-open)
  std::optional<std::filesystem::path> dir;  // one gray PNG per image, same name
  int margin = 2;  // unknown box inset from the border
};

struct OracleSpec {
  oracle::OracleKind kind = oracle::OracleKind::builtin_mlp;
  std::filesystem::path model;  // builtin kinds
  std::string endpoint;         // external; PIXELPROBE_ORACLE_URL if empty
};

/// One JSON document; relative paths resolve against the document's directory.
/// Every field has a default, so a near-empty file runs with the published
/// experiment settings (500 samples, l in {1,3,5}, all regions, both modes,
/// population 400, 100 generations, CR 0.7).
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path masks;
  TrimapSpec trimap;
  OracleSpec oracle;
  std::vector<Region> regions{Region::whole, Region::foreground, Region::background};
  std::vector<int> pixels{1, 3, 5};
  std::vector<attack::AttackMode> modes{attack::AttackMode::untargeted,
                                        attack::AttackMode::targeted};
  std::filesystem::path output = "pixelprobe-out";
  std::uint64_t seed = 0;
  std::size_t samples = 500;
  int jobs = 1;
  de::DeConfig de;
  seg::GrabcutParams grabcut;
};

/// Throws LoadError on unreadable/malformed documents and ContractViolation on
/// out-of-domain values.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace pixelprobe::cli

#endif  // PIXELPROBE_TOOLS_RUN_CONFIG_HPP
