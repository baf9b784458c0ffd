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

#include "pixelprobe/attack.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "pixelprobe/errors.hpp"

namespace pixelprobe::attack {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

de::BatchFitness confidence_fitness(const oracle::Oracle& oracle, const Image& original,
                                    const RegionMask* mask, Region region, int cls, double sign) {
  if (cls < 0 || cls >= oracle.class_count()) {
    throw ContractViolation("class " + std::to_string(cls) + " outside [0, " +
                            std::to_string(oracle.class_count()) + ")");
  }
  if (region != Region::whole && mask == nullptr) {
    throw ContractViolation("region-constrained fitness needs a mask");
  }
  return [&oracle, &original, mask, region, cls, sign](std::span<const de::Vector> batch) {
    std::vector<Image> images;
    images.reserve(batch.size());
    for (const auto& c : batch) images.push_back(perturb_in_region(original, c, mask, region));
    const auto probs = oracle.classify_batch(images);
    std::vector<double> out(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = sign * probs[i][static_cast<std::size_t>(cls)];
    return out;
  };
}

bool is_success(AttackMode mode, int original_label, std::optional<int> target, int label) {
  return mode == AttackMode::untargeted ? label != original_label : label == *target;
}

}  // namespace

std::string_view to_string(AttackMode mode) {
  return mode == AttackMode::untargeted ? "untargeted" : "targeted";
}

AttackMode parse_mode(std::string_view text) {
  if (text == "untargeted") return AttackMode::untargeted;
  if (text == "targeted") return AttackMode::targeted;
  throw ContractViolation("unknown attack mode '" + std::string(text) + "'");
}

bool AttackError::oracle_unavailable() const {
  if (!cause_) return false;
  try {
    std::rethrow_exception(cause_);
  } catch (const OracleUnavailable&) {
    return true;
  } catch (...) {
    return false;
  }
}

void AttackConfig::validate() const {
  if (pixels < 1) throw ContractViolation("pixel budget must be positive");
  if (mode == AttackMode::targeted && !target_class) {
    throw ContractViolation("targeted attack needs a target class");
  }
  if (mode == AttackMode::untargeted && target_class) {
    throw ContractViolation("untargeted attack must not name a target class");
  }
}

std::vector<de::Bounds> candidate_bounds(int height, int width, int pixels) {
  std::vector<de::Bounds> bounds;
  bounds.reserve(static_cast<std::size_t>(pixels) * kTupleSize);
  for (int p = 0; p < pixels; ++p) {
    bounds.push_back({0.0, static_cast<double>(width)});
    bounds.push_back({0.0, static_cast<double>(height)});
    for (int c = 0; c < kChannels; ++c) bounds.push_back({0.0, kMaxIntensity});
  }
  return bounds;
}

de::BatchFitness untargeted_fitness(const oracle::Oracle& oracle, const Image& original,
                                    const RegionMask* mask, Region region, int true_class) {
  return confidence_fitness(oracle, original, mask, region, true_class, 1.0);
}

de::BatchFitness targeted_fitness(const oracle::Oracle& oracle, const Image& original,
                                  const RegionMask* mask, Region region, int target_class) {
  return confidence_fitness(oracle, original, mask, region, target_class, -1.0);
}

AttackOutcome attack_image(const oracle::Oracle& oracle, const Image& original,
                           const RegionMask* mask, const AttackConfig& config) {
  config.validate();
  if (config.region != Region::whole) {
    if (mask == nullptr) throw ContractViolation("region-constrained attack needs a mask");
    if (mask->height() != original.height() || mask->width() != original.width()) {
      throw ContractViolation("mask dimensions do not match image");
    }
    if (mask->count(config.region) == 0) {
      throw ContractViolation(std::string("attacked region '") +
                              std::string(pixelprobe::to_string(config.region)) + "' is empty");
    }
  }

  AttackOutcome outcome;
  outcome.mode = config.mode;
  outcome.target_label = config.target_class;
  outcome.pre_probs = oracle.classify(original);
  outcome.original_label = outcome.pre_probs.argmax();
  if (config.target_class) {
    const int t = *config.target_class;
    if (t < 0 || t >= oracle.class_count()) throw ContractViolation("target class out of range");
    if (t == outcome.original_label) {
      throw ContractViolation("target class equals the original label");
    }
  }

  const de::BatchFitness fitness =
      config.mode == AttackMode::untargeted
          ? untargeted_fitness(oracle, original, mask, config.region, outcome.original_label)
          : targeted_fitness(oracle, original, mask, config.region, *config.target_class);

  // The oracle is pure, so an unchanged best member needs no second query.
  de::Vector last_checked;
  bool last_answer = false;
  const de::EarlyStop early_stop = [&](std::span<const double> best, double) {
    if (!last_checked.empty() && std::equal(best.begin(), best.end(), last_checked.begin(),
                                            last_checked.end())) {
      return last_answer;
    }
    const Image candidate = perturb_in_region(original, best, mask, config.region);
    const int label = oracle.classify(candidate).argmax();
    last_checked.assign(best.begin(), best.end());
    last_answer = is_success(config.mode, outcome.original_label, config.target_class, label);
    return last_answer;
  };

  de::DeConfig de_config = config.de;
  de_config.bounds = candidate_bounds(original.height(), original.width(), config.pixels);

  de::EvolveResult evolved;
  try {
    evolved = de::evolve(fitness, de_config, early_stop);
  } catch (const de::EvolveError& e) {
    throw AttackError(e.what(), e.partial_history(), e.cause());
  }

  outcome.adversarial_image = perturb_in_region(original, evolved.best_member, mask, config.region);
  try {
    outcome.post_probs = oracle.classify(outcome.adversarial_image);
  } catch (const std::exception& e) {
    throw AttackError(std::string("final classification failed: ") + e.what(), evolved.history,
                      std::current_exception());
  }
  outcome.final_label = outcome.post_probs.argmax();
  outcome.final_confidence = outcome.post_probs[static_cast<std::size_t>(outcome.final_label)];
  outcome.success =
      is_success(config.mode, outcome.original_label, config.target_class, outcome.final_label);
  outcome.generations_used = evolved.generations_run;
  outcome.stopped_early = evolved.stopped_early;
  outcome.fitness_history = std::move(evolved.history);
  for (const auto& p : changed_pixels(original, outcome.adversarial_image)) {
    outcome.modified_pixels.push_back({p, outcome.adversarial_image.pixel(p)});
  }
  return outcome;
}

Image apply_changes(const Image& original, std::span<const PixelChange> changes) {
  Image out = original;
  for (const auto& c : changes) {
    if (!out.contains(c.at.x, c.at.y)) throw ContractViolation("recorded change outside the image");
    out.set_pixel(c.at.x, c.at.y, c.color);
  }
  return out;
}

std::string attack_key(std::string_view image_id, AttackMode mode, Region region, int pixels,
                       std::optional<int> target) {
  std::string key(image_id);
  key += '|';
  key += to_string(mode);
  key += '|';
  key += pixelprobe::to_string(region);
  key += '|';
  key += std::to_string(pixels);
  key += '|';
  key += target ? std::to_string(*target) : std::string("-");
  return key;
}

std::string AttackRecord::key() const { return attack_key(image_id, mode, region, pixels, target); }

std::uint64_t attack_seed(std::uint64_t campaign_seed, std::size_t image_index, int target) {
  std::uint64_t h = splitmix64(campaign_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(image_index));
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(target)));
  return h;
}

CampaignResult run_campaign(const oracle::Oracle& oracle, std::span<const DatasetEntry> dataset,
                            const AttackConfig& base, std::span<const AttackMode> modes,
                            const CampaignOptions& options) {
  if (base.pixels < 1) throw ContractViolation("pixel budget must be positive");
  const int jobs = std::max(1, options.jobs);

  std::vector<std::vector<AttackRecord>> per_image(dataset.size());
  std::atomic<std::size_t> skipped{0};
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr abort_error;
  std::mutex mutex;

  auto deliver = [&](const AttackRecord& record) {
    if (!options.on_record) return;
    std::lock_guard lock(mutex);
    options.on_record(record);
  };
  auto progress = [&](std::size_t index, std::string_view note) {
    if (!options.on_progress) return;
    std::lock_guard lock(mutex);
    options.on_progress(index, note);
  };

  auto attack_one = [&](std::size_t index) {
    const DatasetEntry& entry = dataset[index];
    auto& out = per_image[index];

    auto base_record = [&](AttackMode mode, std::optional<int> target) {
      AttackRecord r;
      r.image_id = entry.id;
      r.image_index = index;
      r.network = oracle.name();
      r.region = base.region;
      r.pixels = base.pixels;
      r.mode = mode;
      r.target = target;
      r.seed = attack_seed(options.seed, index, target.value_or(-1));
      return r;
    };

    ClassProbabilities pre;
    try {
      pre = oracle.classify(entry.image);
    } catch (const OracleUnavailable&) {
      throw;
    } catch (const std::exception& e) {
      for (AttackMode mode : modes) {
        AttackRecord r = base_record(mode, std::nullopt);
        r.error = std::string("classification failed: ") + e.what();
        deliver(r);
        out.push_back(std::move(r));
      }
      progress(index, "failed");
      return;
    }
    const int predicted = pre.argmax();
    if (entry.label && *entry.label != predicted) {
      ++skipped;
      progress(index, "skipped (misclassified)");
      return;
    }

    for (AttackMode mode : modes) {
      std::vector<std::optional<int>> targets;
      if (mode == AttackMode::untargeted) {
        targets.emplace_back(std::nullopt);
      } else {
        for (int t = 0; t < oracle.class_count(); ++t) {
          if (t != predicted) targets.emplace_back(t);
        }
      }
      for (const auto& target : targets) {
        if (abort) return;
        AttackRecord record = base_record(mode, target);
        if (options.already_done && options.already_done(record.key())) continue;
        AttackConfig config = base;
        config.mode = mode;
        config.target_class = target;
        config.de.seed = record.seed;
        try {
          const RegionMask* mask = entry.mask ? &*entry.mask : nullptr;
          record.outcome = attack_image(oracle, entry.image, mask, config);
        } catch (const AttackError& e) {
          if (e.oracle_unavailable()) throw;
          record.error = e.what();
          record.outcome.fitness_history = e.partial_history();
        } catch (const OracleUnavailable&) {
          throw;
        } catch (const std::exception& e) {
          record.error = e.what();
        }
        deliver(record);
        out.push_back(std::move(record));
      }
    }
    progress(index, "done");
  };

  auto worker = [&] {
    while (!abort) {
      const std::size_t index = next++;
      if (index >= dataset.size()) return;
      try {
        attack_one(index);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!abort_error) abort_error = std::current_exception();
        abort = true;
      }
    }
  };

  if (jobs == 1 || dataset.size() <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs), dataset.size());
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
  }

  if (abort_error) {
    try {
      std::rethrow_exception(abort_error);
    } catch (const AttackError&) {
      throw;
    } catch (const std::exception& e) {
      throw AttackError(std::string("campaign aborted: ") + e.what(), {}, abort_error);
    }
  }

  CampaignResult result;
  result.skipped_misclassified = skipped;
  for (auto& records : per_image) {
    for (auto& r : records) result.records.push_back(std::move(r));
  }
  return result;
}

}  // namespace pixelprobe::attack
