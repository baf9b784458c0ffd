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

#ifndef PIXELPROBE_TOOLS_DATASET_HPP
#define PIXELPROBE_TOOLS_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pixelprobe/attack.hpp"

namespace pixelprobe::cli {

// A dataset directory holds PNG images (ids are file names, sorted) and an
// optional labels.csv with "id,label" rows. Masks live in a separate directory
// under the same file names.

/// Throws LoadError on unreadable images, bad label rows or, when `masks` is
/// non-empty, a missing or mis-sized mask.
std::vector<attack::DatasetEntry> load_dataset(const std::filesystem::path& dir,
                                               const std::filesystem::path& masks = {});

/// Writes images, labels.csv (when every entry is labelled) and, under
/// `masks_dir`, the masks of entries that have one.
void write_dataset(std::span<const attack::DatasetEntry> entries, const std::filesystem::path& dir,
                   const std::filesystem::path& masks_dir);

/// Indices of a seeded sample of `count` items out of `total`, ascending.
std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count, std::uint64_t seed);

}  // namespace pixelprobe::cli

#endif  // PIXELPROBE_TOOLS_DATASET_HPP
