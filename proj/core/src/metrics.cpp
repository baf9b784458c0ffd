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

#include "pixelprobe/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "pixelprobe/errors.hpp"

namespace pixelprobe::metrics {
namespace {

using attack::AttackMode;
using Json = nlohmann::json;

bool usable(const AttackRecord& r) { return !r.error.has_value(); }

bool canonical_less(const AttackRecord& a, const AttackRecord& b) {
  const int ta = a.target.value_or(-1);
  const int tb = b.target.value_or(-1);
  return std::tie(a.network, a.region, a.pixels, a.mode, a.image_id, a.image_index, ta, a.seed) <
         std::tie(b.network, b.region, b.pixels, b.mode, b.image_id, b.image_index, tb, b.seed);
}

// Usable records in a fixed order, so floating-point sums do not depend on the
// order the records arrived in.
std::vector<const AttackRecord*> canonical(std::span<const AttackRecord> records) {
  std::vector<const AttackRecord*> out;
  for (const auto& r : records) {
    if (usable(r)) out.push_back(&r);
  }
  std::stable_sort(out.begin(), out.end(), [](const AttackRecord* a, const AttackRecord* b) {
    return canonical_less(*a, *b);
  });
  return out;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<AttackRecord> filter_mode(std::span<const AttackRecord> records, AttackMode mode) {
  std::vector<AttackRecord> out;
  for (const auto& r : records) {
    if (usable(r) && r.mode == mode) out.push_back(r);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ContractViolation("cannot format number");
  return std::string(buf, end);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string cell_prefix(const CellKey& key) {
  return key.network + "," + std::string(to_string(key.region)) + "," + std::to_string(key.pixels);
}

}  // namespace

SuccessRates success_rates(std::span<const AttackRecord> records) {
  SuccessRates out;
  double conf_u = 0.0;
  double conf_t = 0.0;
  std::map<std::string, bool> targeted_images;
  for (const AttackRecord* r : canonical(records)) {
    const auto& o = r->outcome;
    if (r->mode == AttackMode::untargeted) {
      ++out.untargeted_attempts;
      if (o.success) {
        ++out.untargeted_successes;
        conf_u += o.final_confidence;
      }
    } else {
      ++out.targeted_attempts;
      auto& reached = targeted_images[r->image_id];
      if (o.success) {
        ++out.targeted_successes;
        conf_t += o.final_confidence;
        reached = true;
      }
    }
  }
  out.targeted_images = targeted_images.size();
  for (const auto& [id, reached] : targeted_images) {
    if (reached) ++out.targeted_images_reached;
  }
  out.untargeted1 = ratio(out.untargeted_successes, out.untargeted_attempts);
  out.targeted = ratio(out.targeted_successes, out.targeted_attempts);
  out.untargeted2 = ratio(out.targeted_images_reached, out.targeted_images);
  if (out.untargeted_successes > 0) {
    out.confidence_u = conf_u / static_cast<double>(out.untargeted_successes);
  }
  if (out.targeted_successes > 0) {
    out.confidence_t = conf_t / static_cast<double>(out.targeted_successes);
  }
  return out;
}

double confidence_decrease(const ClassProbabilities& pre, const ClassProbabilities& post,
                           std::size_t k) {
  if (pre.size() != post.size()) throw ContractViolation("probability vectors differ in length");
  if (k == 0 || k > pre.size()) throw ContractViolation("k must be in [1, class count]");
  double total = 0.0;
  for (int c : pre.top_k(k)) {
    total += pre[static_cast<std::size_t>(c)] - post[static_cast<std::size_t>(c)];
  }
  return total / static_cast<double>(k);
}

std::optional<double> mean_confidence_decrease(std::span<const AttackRecord> records,
                                               std::size_t k, bool successful) {
  double total = 0.0;
  std::size_t n = 0;
  for (const AttackRecord* r : canonical(records)) {
    if (r->outcome.success != successful) continue;
    total += confidence_decrease(r->outcome.pre_probs, r->outcome.post_probs, k);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

bool retains_rank(const ClassProbabilities& pre, const ClassProbabilities& post, std::size_t j,
                  std::size_t k) {
  if (pre.size() != post.size()) throw ContractViolation("probability vectors differ in length");
  if (j == 0 || j > k || k > pre.size()) throw ContractViolation("need 1 <= j <= k <= class count");
  const auto after = post.top_k(k);
  for (int c : pre.top_k(j)) {
    if (std::find(after.begin(), after.end(), c) == after.end()) return false;
  }
  return true;
}

std::optional<double> rank_retention(std::span<const AttackRecord> records, std::size_t j,
                                     std::size_t k, bool successful) {
  std::size_t hits = 0;
  std::size_t n = 0;
  for (const AttackRecord* r : canonical(records)) {
    if (r->outcome.success != successful) continue;
    if (k > r->outcome.pre_probs.size()) return std::nullopt;
    if (retains_rank(r->outcome.pre_probs, r->outcome.post_probs, j, k)) ++hits;
    ++n;
  }
  return ratio(hits, n);
}

Matrix class_pair_matrix(std::span<const AttackRecord> records, std::size_t class_count) {
  Matrix m(class_count, std::vector<long>(class_count, 0));
  for (const auto& r : records) {
    if (!usable(r) || !r.outcome.success) continue;
    const int from = r.outcome.original_label;
    const int to = r.outcome.final_label;
    if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= class_count ||
        static_cast<std::size_t>(to) >= class_count) {
      throw ContractViolation("record label outside the class range");
    }
    if (from != to) ++m[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
  }
  return m;
}

std::vector<long> target_count_histogram(std::span<const AttackRecord> records,
                                         std::size_t class_count) {
  std::map<std::string, std::set<int>> reached;
  for (const auto& r : records) {
    if (!usable(r) || r.mode != AttackMode::targeted) continue;
    auto& targets = reached[r.image_id];
    if (r.outcome.success && r.target) targets.insert(*r.target);
  }
  std::vector<long> hist(class_count, 0);
  for (const auto& [id, targets] : reached) {
    if (targets.size() >= class_count) {
      throw ContractViolation("image '" + id + "' reached more targets than the class count allows");
    }
    ++hist[targets.size()];
  }
  return hist;
}

FitnessSummary fitness_summary(std::span<const AttackRecord> records) {
  FitnessSummary out;
  const auto ordered = canonical(records);
  std::size_t length = 0;
  for (const AttackRecord* r : ordered) {
    if (r->outcome.fitness_history.empty()) {
      throw ContractViolation("record '" + r->key() + "' has an empty fitness history");
    }
    length = std::max(length, r->outcome.fitness_history.size());
  }
  if (!ordered.empty()) {
    out.mean_curve.assign(length, 0.0);
    for (const AttackRecord* r : ordered) {
      const auto& h = r->outcome.fitness_history;
      for (std::size_t g = 0; g < length; ++g) {
        out.mean_curve[g] += g < h.size() ? h[g] : h.back();
      }
    }
    for (double& v : out.mean_curve) v /= static_cast<double>(ordered.size());
  }
  double generations = 0.0;
  std::size_t successes = 0;
  for (const AttackRecord* r : ordered) {
    if (!r->outcome.success) continue;
    generations += r->outcome.generations_used;
    ++successes;
  }
  if (successes > 0) out.mean_generations = generations / static_cast<double>(successes);
  return out;
}

CampaignReport build_report(std::span<const AttackRecord> records) {
  CampaignReport report;
  report.record_count = records.size();
  std::map<CellKey, std::vector<AttackRecord>> cells;
  for (const auto& r : records) {
    if (!usable(r)) {
      ++report.error_count;
      continue;
    }
    cells[CellKey{r.network, r.region, r.pixels}].push_back(r);
  }
  for (auto& [key, group] : cells) {
    CellReport cell;
    cell.key = key;
    for (const auto& r : group) {
      const std::size_t k = r.outcome.pre_probs.size();
      if (cell.class_count != 0 && k != cell.class_count) {
        throw ContractViolation("records in cell " + cell_prefix(key) +
                                " disagree on the class count");
      }
      cell.class_count = k;
    }
    cell.rates = success_rates(group);

    const auto untargeted = filter_mode(group, AttackMode::untargeted);
    const auto targeted = filter_mode(group, AttackMode::targeted);
    const std::size_t kc = cell.class_count;
    if (kc >= 1) cell.decrease_top1_success = mean_confidence_decrease(untargeted, 1, true);
    if (kc >= 3) cell.decrease_top3_failure = mean_confidence_decrease(untargeted, 3, false);
    if (kc >= 5) cell.decrease_top5_failure = mean_confidence_decrease(untargeted, 5, false);
    if (kc >= 3) {
      cell.top1_in_top3_success = rank_retention(untargeted, 1, 3, true);
      cell.top3_in_top3_failure = rank_retention(untargeted, 3, 3, false);
    }
    if (kc >= 5) {
      cell.top1_in_top5_success = rank_retention(untargeted, 1, 5, true);
      cell.top5_in_top5_failure = rank_retention(untargeted, 5, 5, false);
    }
    cell.class_pairs_untargeted = class_pair_matrix(untargeted, kc);
    cell.class_pairs_targeted = class_pair_matrix(targeted, kc);
    cell.target_histogram = target_count_histogram(targeted, kc);
    cell.fitness_untargeted = fitness_summary(untargeted);
    cell.fitness_targeted = fitness_summary(targeted);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string report_json(const CampaignReport& report) {
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    const auto& r = c.rates;
    Json cell;
    cell["network"] = c.key.network;
    cell["region"] = std::string(to_string(c.key.region));
    cell["pixels"] = c.key.pixels;
    cell["class_count"] = c.class_count;
    cell["untargeted_attempts"] = r.untargeted_attempts;
    cell["untargeted_successes"] = r.untargeted_successes;
    cell["targeted_attempts"] = r.targeted_attempts;
    cell["targeted_successes"] = r.targeted_successes;
    cell["targeted_images"] = r.targeted_images;
    cell["targeted_images_reached"] = r.targeted_images_reached;
    cell["untargeted1"] = optional_json(r.untargeted1);
    cell["targeted"] = optional_json(r.targeted);
    cell["untargeted2"] = optional_json(r.untargeted2);
    cell["confidence_u"] = optional_json(r.confidence_u);
    cell["confidence_t"] = optional_json(r.confidence_t);
    cell["decrease_top1_success"] = optional_json(c.decrease_top1_success);
    cell["decrease_top3_failure"] = optional_json(c.decrease_top3_failure);
    cell["decrease_top5_failure"] = optional_json(c.decrease_top5_failure);
    cell["top1_in_top3_success"] = optional_json(c.top1_in_top3_success);
    cell["top1_in_top5_success"] = optional_json(c.top1_in_top5_success);
    cell["top3_in_top3_failure"] = optional_json(c.top3_in_top3_failure);
    cell["top5_in_top5_failure"] = optional_json(c.top5_in_top5_failure);
    cell["mean_generations_untargeted"] = optional_json(c.fitness_untargeted.mean_generations);
    cell["mean_generations_targeted"] = optional_json(c.fitness_targeted.mean_generations);
    cell["class_pairs_untargeted"] = c.class_pairs_untargeted;
    cell["class_pairs_targeted"] = c.class_pairs_targeted;
    cell["target_histogram"] = c.target_histogram;
    cell["fitness_mean_untargeted"] = c.fitness_untargeted.mean_curve;
    cell["fitness_mean_targeted"] = c.fitness_targeted.mean_curve;
    cells.push_back(std::move(cell));
  }
  Json doc;
  doc["record_count"] = report.record_count;
  doc["error_count"] = report.error_count;
  doc["cells"] = std::move(cells);
  return doc.dump(2) + "\n";
}

std::string tables_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "network,region,pixels,untargeted_attempts,untargeted_successes,untargeted1,"
         "targeted_attempts,targeted_successes,targeted,targeted_images,"
         "targeted_images_reached,untargeted2,confidence_u,confidence_t,"
         "decrease_top1_success,decrease_top3_failure,decrease_top5_failure,"
         "top1_in_top3_success,top1_in_top5_success,top3_in_top3_failure,"
         "top5_in_top5_failure,mean_generations_untargeted,mean_generations_targeted\n";
  for (const auto& c : report.cells) {
    const auto& r = c.rates;
    out << cell_prefix(c.key) << ',' << r.untargeted_attempts << ',' << r.untargeted_successes
        << ',' << format_optional(r.untargeted1) << ',' << r.targeted_attempts << ','
        << r.targeted_successes << ',' << format_optional(r.targeted) << ',' << r.targeted_images
        << ',' << r.targeted_images_reached << ',' << format_optional(r.untargeted2) << ','
        << format_optional(r.confidence_u) << ',' << format_optional(r.confidence_t) << ','
        << format_optional(c.decrease_top1_success) << ','
        << format_optional(c.decrease_top3_failure) << ','
        << format_optional(c.decrease_top5_failure) << ','
        << format_optional(c.top1_in_top3_success) << ','
        << format_optional(c.top1_in_top5_success) << ','
        << format_optional(c.top3_in_top3_failure) << ','
        << format_optional(c.top5_in_top5_failure) << ','
        << format_optional(c.fitness_untargeted.mean_generations) << ','
        << format_optional(c.fitness_targeted.mean_generations) << '\n';
  }
  return out.str();
}

std::string heatmap_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "network,region,pixels,mode,source,target,count\n";
  for (const auto& c : report.cells) {
    for (AttackMode mode : {AttackMode::untargeted, AttackMode::targeted}) {
      const Matrix& m =
          mode == AttackMode::untargeted ? c.class_pairs_untargeted : c.class_pairs_targeted;
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
          out << cell_prefix(c.key) << ',' << attack::to_string(mode) << ',' << i << ',' << j
              << ',' << m[i][j] << '\n';
        }
      }
    }
  }
  return out.str();
}

std::string histogram_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "network,region,pixels,targets_reached,images\n";
  for (const auto& c : report.cells) {
    for (std::size_t b = 0; b < c.target_histogram.size(); ++b) {
      out << cell_prefix(c.key) << ',' << b << ',' << c.target_histogram[b] << '\n';
    }
  }
  return out.str();
}

std::string fitness_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "network,region,pixels,mode,generation,mean_fitness\n";
  for (const auto& c : report.cells) {
    for (AttackMode mode : {AttackMode::untargeted, AttackMode::targeted}) {
      const auto& curve = mode == AttackMode::untargeted ? c.fitness_untargeted.mean_curve
                                                         : c.fitness_targeted.mean_curve;
      for (std::size_t g = 0; g < curve.size(); ++g) {
        out << cell_prefix(c.key) << ',' << attack::to_string(mode) << ',' << g << ','
            << format_double(curve[g]) << '\n';
      }
    }
  }
  return out.str();
}

void write_report(const CampaignReport& report, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const std::pair<const char*, std::string> files[] = {
      {"report.json", report_json(report)},     {"tables.csv", tables_csv(report)},
      {"heatmap.csv", heatmap_csv(report)},     {"histogram.csv", histogram_csv(report)},
      {"fitness_mean.csv", fitness_csv(report)},
  };
  for (const auto& [name, text] : files) {
    std::ofstream out(directory / name, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw LoadError("cannot write " + (directory / name).string());
  }
}

}  // namespace pixelprobe::metrics
