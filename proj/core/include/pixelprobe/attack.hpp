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

#ifndef PIXELPROBE_ATTACK_HPP
#define PIXELPROBE_ATTACK_HPP

#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pixelprobe/de.hpp"
#include "pixelprobe/image.hpp"
#include "pixelprobe/oracle.hpp"

namespace pixelprobe::attack {

enum class AttackMode { untargeted, targeted };

std::string_view to_string(AttackMode mode);
AttackMode parse_mode(std::string_view text);

struct PixelChange {
  PixelCoord at;
  Rgb color;
  friend bool operator==(const PixelChange&, const PixelChange&) = default;
};

struct AttackConfig {
  AttackMode mode = AttackMode::untargeted;
  std::optional<int> target_class;  // targeted only
  int pixels = 1;
  Region region = Region::whole;
  // Search settings. `de.bounds` is ignored: the attack derives the
  // (x, y, r, g, b) box from the image.
  de::DeConfig de;

  void validate() const;
};

struct AttackOutcome {
  bool success = false;
  AttackMode mode = AttackMode::untargeted;
  int original_label = 0;
  int final_label = 0;
  std::optional<int> target_label;
  double final_confidence = 0.0;
  // Not serialized; rebuild from the original with apply_changes().
  Image adversarial_image;
  int generations_used = 0;
  bool stopped_early = false;
  std::vector<double> fitness_history;
  // Pixels where the adversarial image differs from the original, with the
  // colour written there.
  std::vector<PixelChange> modified_pixels;
  ClassProbabilities pre_probs;
  ClassProbabilities post_probs;
};

/// Raised when an attack cannot complete; keeps whatever fitness history was
/// gathered and the underlying cause.
class AttackError : public std::runtime_error {
 public:
  AttackError(const std::string& what, std::vector<double> partial_history,
              std::exception_ptr cause)
      : std::runtime_error(what), partial_history_(std::move(partial_history)),
        cause_(std::move(cause)) {}

  const std::vector<double>& partial_history() const { return partial_history_; }
  std::exception_ptr cause() const { return cause_; }
  /// True when the root cause is an unreachable oracle.
  bool oracle_unavailable() const;

 private:
  std::vector<double> partial_history_;
  std::exception_ptr cause_;
};

/// Box for l tuples: x in [0, width), y in [0, height), channels in [0, 255].
std::vector<de::Bounds> candidate_bounds(int height, int width, int pixels);

/// fitness(c) = P(true_class | composite image). Region::whole skips the mask.
de::BatchFitness untargeted_fitness(const oracle::Oracle& oracle, const Image& original,
                                    const RegionMask* mask, Region region, int true_class);

/// fitness(c) = -P(target_class | composite image), so minimizing maximizes
/// the target confidence.
de::BatchFitness targeted_fitness(const oracle::Oracle& oracle, const Image& original,
                                  const RegionMask* mask, Region region, int target_class);

/// Region-constrained few-pixel attack on one image. The original label is
/// the oracle's prediction on `original`. Out-of-region tuples evaluate as the
/// unmodified image, so the search is confined from the first generation.
AttackOutcome attack_image(const oracle::Oracle& oracle, const Image& original,
                           const RegionMask* mask, const AttackConfig& config);

/// Rebuilds an adversarial image from its recorded changes.
Image apply_changes(const Image& original, std::span<const PixelChange> changes);

struct DatasetEntry {
  std::string id;
  Image image;
  std::optional<RegionMask> mask;
  // Ground truth if known; images the oracle already misclassifies are skipped.
  std::optional<int> label;
};

/// One executed (or failed) attack with the identity used for resuming and
/// reporting.
struct AttackRecord {
  std::string image_id;
  std::size_t image_index = 0;
  std::string network;
  Region region = Region::whole;
  int pixels = 1;
  AttackMode mode = AttackMode::untargeted;
  std::optional<int> target;
  std::uint64_t seed = 0;
  std::optional<std::string> error;
  AttackOutcome outcome;

  /// "image_id|mode|region|pixels|target", unique within a campaign.
  std::string key() const;
};

std::string attack_key(std::string_view image_id, AttackMode mode, Region region, int pixels,
                       std::optional<int> target);

/// Seed of one attack, mixed from the campaign seed, the image's position in
/// the dataset and the target class (-1 for untargeted).
std::uint64_t attack_seed(std::uint64_t campaign_seed, std::size_t image_index, int target);

struct CampaignOptions {
  std::uint64_t seed = 0;
  // Images attacked in parallel.
  int jobs = 1;
  // Return true to skip an attack (already on disk).
  std::function<bool(const std::string& key)> already_done;
  // Called once per finished record, serialized across workers.
  std::function<void(const AttackRecord&)> on_record;
  // Called once per image after its attacks finish (or it is skipped).
  std::function<void(std::size_t image_index, std::string_view note)> on_progress;
};

struct CampaignResult {
  std::vector<AttackRecord> records;  // image order, then mode, then target
  std::size_t skipped_misclassified = 0;
};

/// Runs every requested mode over the dataset with `base`'s region and pixel
/// budget. Targeted mode attacks each image towards all classes other than its
/// original one. Per-image failures become error records; an unreachable
/// oracle aborts the campaign with AttackError after the records finished so
/// far have been delivered.
CampaignResult run_campaign(const oracle::Oracle& oracle, std::span<const DatasetEntry> dataset,
                            const AttackConfig& base, std::span<const AttackMode> modes,
                            const CampaignOptions& options);

}  // namespace pixelprobe::attack

#endif  // PIXELPROBE_ATTACK_HPP
