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

#ifndef PIXELPROBE_RECORDS_HPP
#define PIXELPROBE_RECORDS_HPP

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pixelprobe/attack.hpp"

// Attack records as JSON lines, one object per attack:
//
//   {"image_id":"img_0003.png","image_index":3,"network":"builtin-mlp",
//    "mode":"targeted","region":"foreground","pixels":1,"target":5,
//    "seed":123,"success":true,"original_label":2,"final_label":5,
//    "final_confidence":0.51,"generations":12,"stopped_early":true,
//    "fitness_history":[...],"changes":[[x,y,r,g,b],...],
//    "pre_probs":[...],"post_probs":[...]}
//
// Failed attacks carry "error" instead of the outcome fields. Doubles are
// written in shortest round-trip form, so reading a record back is exact.
namespace pixelprobe::records {

std::string to_json_line(const attack::AttackRecord& record);

/// Throws LoadError on malformed input.
attack::AttackRecord from_json_line(std::string_view line);

/// Reads a JSON-lines file. Blank lines are ignored; a corrupt line raises
/// LoadError naming its 1-based line number. A missing file yields no records.
std::vector<attack::AttackRecord> read_records(const std::filesystem::path& path);

void write_records(const std::filesystem::path& path, const std::vector<attack::AttackRecord>& records);

std::set<std::string> record_keys(const std::vector<attack::AttackRecord>& records);

/// Region-confinement check of one record against its source image and mask:
/// every change lies inside the image and the attacked region, no more than
/// `pixels` pixels change, and (when the record still holds its adversarial
/// image) the recorded changes are exactly where the images differ. Returns
/// one message per violation; empty means the record is clean.
std::vector<std::string> verify_record(const attack::AttackRecord& record, const Image& original,
                                       const RegionMask* mask);

}  // namespace pixelprobe::records

#endif  // PIXELPROBE_RECORDS_HPP
