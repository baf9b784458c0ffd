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

#include "dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "pixelprobe/errors.hpp"
#include "pixelprobe/image_io.hpp"
#include "pixelprobe/segmentation.hpp"

namespace pixelprobe::cli {
namespace {

std::map<std::string, int> read_labels(const std::filesystem::path& path) {
  std::map<std::string, int> labels;
  std::ifstream in(path);
  if (!in) return labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("id,", 0) == 0)) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      const std::string value = line.substr(comma + 1);
      const int label = std::stoi(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing text");
      labels[line.substr(0, comma)] = label;
    } catch (const std::exception&) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": expected 'id,label'");
    }
  }
  return labels;
}

}  // namespace

std::vector<attack::DatasetEntry> load_dataset(const std::filesystem::path& dir,
                                               const std::filesystem::path& masks) {
  if (!std::filesystem::is_directory(dir)) {
    throw LoadError("dataset directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  const auto labels = read_labels(dir / "labels.csv");

  std::vector<attack::DatasetEntry> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    attack::DatasetEntry entry;
    entry.id = f.filename().string();
    entry.image = read_png(f);
    if (auto it = labels.find(entry.id); it != labels.end()) entry.label = it->second;
    if (!masks.empty()) {
      const auto mask_path = masks / f.filename();
      if (!std::filesystem::exists(mask_path)) {
        throw LoadError("no mask for '" + entry.id + "' in " + masks.string());
      }
      entry.mask = seg::load_mask(mask_path, entry.image.height(), entry.image.width());
    }
    out.push_back(std::move(entry));
  }
  return out;
}

void write_dataset(std::span<const attack::DatasetEntry> entries, const std::filesystem::path& dir,
                   const std::filesystem::path& masks_dir) {
  std::filesystem::create_directories(dir);
  bool all_labelled = !entries.empty();
  for (const auto& e : entries) {
    write_png(dir / e.id, e.image);
    all_labelled = all_labelled && e.label.has_value();
    if (e.mask) {
      std::filesystem::create_directories(masks_dir);
      write_mask_png(masks_dir / e.id, *e.mask);
    }
  }
  if (all_labelled) {
    std::ofstream out(dir / "labels.csv", std::ios::trunc);
    out << "id,label\n";
    for (const auto& e : entries) out << e.id << ',' << *e.label << '\n';
  }
}

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count >= total) return idx;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates with an explicit uniform draw so the sample does not
  // depend on the standard library's distribution implementation.
  for (std::size_t i = 0; i < count; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const std::size_t j = i + static_cast<std::size_t>(u * static_cast<double>(total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace pixelprobe::cli
