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

#ifndef PIXELPROBE_METRICS_HPP
#define PIXELPROBE_METRICS_HPP

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pixelprobe/attack.hpp"

namespace pixelprobe::metrics {

using attack::AttackRecord;

struct SuccessRates {
  std::size_t untargeted_attempts = 0;
  std::size_t untargeted_successes = 0;
  std::size_t targeted_attempts = 0;
  std::size_t targeted_successes = 0;
  // Distinct images with at least one targeted attack / at least one success.
  std::size_t targeted_images = 0;
  std::size_t targeted_images_reached = 0;

  // Rates are undefined (nullopt) when there was nothing to divide by.
  std::optional<double> untargeted1;
  std::optional<double> targeted;
  std::optional<double> untargeted2;
  // Mean final confidence over successful attacks of each mode.
  std::optional<double> confidence_u;
  std::optional<double> confidence_t;

  friend bool operator==(const SuccessRates&, const SuccessRates&) = default;
};

/// Rates and confidences over a set of records. Error records are ignored.
SuccessRates success_rates(std::span<const AttackRecord> records);

/// Mean over the k classes ranked highest by `pre` of (pre - post). Throws
/// ContractViolation when k is zero, exceeds the class count, or the vectors
/// differ in length.
double confidence_decrease(const ClassProbabilities& pre, const ClassProbabilities& post,
                           std::size_t k);

/// Average confidence_decrease over the records whose success flag equals
/// `successful`. nullopt when there are none.
std::optional<double> mean_confidence_decrease(std::span<const AttackRecord> records,
                                               std::size_t k, bool successful);

/// True when every one of the original top-j classes is among the post-attack
/// top-k. Ties rank the lower class index first.
bool retains_rank(const ClassProbabilities& pre, const ClassProbabilities& post, std::size_t j,
                  std::size_t k);

/// Fraction of records (filtered by success flag) retaining their top-j in the
/// top-k. nullopt when no record qualifies or k exceeds the class count.
std::optional<double> rank_retention(std::span<const AttackRecord> records, std::size_t j,
                                     std::size_t k, bool successful);

using Matrix = std::vector<std::vector<long>>;

/// (original, final) counts over successful records; the diagonal is zero.
Matrix class_pair_matrix(std::span<const AttackRecord> records, std::size_t class_count);

/// Bin c counts the images (with at least one targeted record) that reached
/// exactly c distinct target classes. Bins 0..class_count-1.
std::vector<long> target_count_histogram(std::span<const AttackRecord> records,
                                         std::size_t class_count);

struct FitnessSummary {
  // Per-generation mean of the histories, each right-padded with its final
  // value to the longest length.
  std::vector<double> mean_curve;
  // Mean generations over successful records; nullopt without successes.
  std::optional<double> mean_generations;

  friend bool operator==(const FitnessSummary&, const FitnessSummary&) = default;
};

FitnessSummary fitness_summary(std::span<const AttackRecord> records);

struct CellKey {
  std::string network;
  Region region = Region::whole;
  int pixels = 1;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

/// Aggregates for one (network, region, pixel budget) cell.
struct CellReport {
  CellKey key;
  std::size_t class_count = 0;
  SuccessRates rates;

  // Confidence decrease of the original top-k, untargeted attacks.
  std::optional<double> decrease_top1_success;
  std::optional<double> decrease_top3_failure;
  std::optional<double> decrease_top5_failure;
  // Rank retention, untargeted attacks.
  std::optional<double> top1_in_top3_success;
  std::optional<double> top1_in_top5_success;
  std::optional<double> top3_in_top3_failure;
  std::optional<double> top5_in_top5_failure;

  Matrix class_pairs_untargeted;
  Matrix class_pairs_targeted;
  std::vector<long> target_histogram;
  FitnessSummary fitness_untargeted;
  FitnessSummary fitness_targeted;

  friend bool operator==(const CellReport&, const CellReport&) = default;
};

struct CampaignReport {
  std::size_t record_count = 0;
  std::size_t error_count = 0;
  std::vector<CellReport> cells;  // ordered by key

  friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

/// Pure fold over records: the input order does not affect the result.
CampaignReport build_report(std::span<const AttackRecord> records);

std::string report_json(const CampaignReport& report);
std::string tables_csv(const CampaignReport& report);
std::string heatmap_csv(const CampaignReport& report);
std::string histogram_csv(const CampaignReport& report);
std::string fitness_csv(const CampaignReport& report);

/// Writes report.json, tables.csv, heatmap.csv, histogram.csv and
/// fitness_mean.csv into `directory`, creating it if needed.
void write_report(const CampaignReport& report, const std::filesystem::path& directory);

}  // namespace pixelprobe::metrics

#endif  // PIXELPROBE_METRICS_HPP
