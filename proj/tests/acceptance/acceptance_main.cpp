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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and sizes
// are pinned below; the process exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pixelprobe/attack.hpp"
#include "pixelprobe/builtin_classifiers.hpp"
#include "pixelprobe/de.hpp"
#include "pixelprobe/metrics.hpp"
#include "pixelprobe/records.hpp"
#include "pixelprobe/segmentation.hpp"
#include "pixelprobe/synthetic.hpp"
#include "support/cut_oracle.hpp"
#include "support/metrics_fixture.hpp"
#include "support/test_oracles.hpp"

namespace {

using namespace pixelprobe;
using Clock = std::chrono::steady_clock;

// Criterion 1
constexpr std::size_t kBruteImages = 200;
constexpr double kBruteMinSuccess = 0.90;
constexpr double kBruteMaxSeconds = 300.0;
// Criterion 2
constexpr std::size_t kMinConfinementOutcomes = 1000;
// Criterion 3
constexpr std::size_t kPatchTrain = 1000;
constexpr std::size_t kPatchTest = 200;
constexpr double kPatchMinAccuracy = 0.95;
constexpr double kPatchMinRatio = 1.5;
constexpr double kPatchMaxSeconds = 900.0;
// Criterion 4
constexpr int kCutInstances = 100;
constexpr int kCutMaxUnknown = 12;
constexpr double kCutTolerance = 1e-9;
// Criterion 5
constexpr std::size_t kShapeImages = 20;
constexpr double kShapeMinIou = 0.95;
// Criterion 6
constexpr int kSphereSeeds = 10;
constexpr double kSphereTarget = 1e-2;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1]) return false;
  }
  return true;
}

struct Suite {
  // Every attack outcome produced by any criterion, for the confinement check.
  struct Executed {
    attack::AttackOutcome outcome;
    Image original;
    std::optional<RegionMask> mask;
    Region region;
    int pixels;
  };
  std::vector<Executed> executed;
  // Every best-fitness history produced by any DE run.
  std::vector<std::vector<double>> histories;
  std::map<int, std::string> lines;
  int failures = 0;

  attack::AttackOutcome run(const oracle::Oracle& o, const Image& img, const RegionMask* mask,
                            const attack::AttackConfig& cfg) {
    auto out = attack::attack_image(o, img, mask, cfg);
    executed.push_back({out, img, mask ? std::optional<RegionMask>(*mask) : std::nullopt,
                        cfg.region, cfg.pixels});
    histories.push_back(out.fitness_history);
    return out;
  }

  void report(int id, const char* name, bool pass, const std::string& detail) {
    lines[id] = std::string(pass ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + " (" +
                name + "): " + detail;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
    if (!pass) ++failures;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Logits computed straight from the weights, bypassing the classifier.
int linear_argmax(const oracle::LinearClassifier& model, const Image& img) {
  const auto& w = model.weights();
  Eigen::VectorXd x(static_cast<Eigen::Index>(img.data().size()));
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = img.data()[i] / 255.0;
  }
  const Eigen::VectorXd logits = w * x + model.bias();
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

void brute_force_equivalence(Suite& s) {
  const auto start = Clock::now();
  const auto train = synthetic::quadrant_dataset(400, 11);
  oracle::TrainOptions to;
  to.kind = oracle::OracleKind::builtin_linear;
  to.seed = 1;
  const auto model = oracle::train_builtin(synthetic::labeled(train), to);
  const auto& lin = dynamic_cast<const oracle::LinearClassifier&>(*model);
  const auto images = synthetic::random_images(kBruteImages, 8, 8, 99);

  std::size_t attackable = 0, attackable_hit = 0, unattackable_hit = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& img = images[i];
    const int original = linear_argmax(lin, img);
    bool can = false;
    for (int y = 0; y < 8 && !can; ++y) {
      for (int x = 0; x < 8 && !can; ++x) {
        for (int corner = 0; corner < 8 && !can; ++corner) {
          Image c = img;
          c.set_pixel(x, y, {corner & 1 ? 255.0 : 0.0, corner & 2 ? 255.0 : 0.0,
                             corner & 4 ? 255.0 : 0.0});
          can = linear_argmax(lin, c) != original;
        }
      }
    }
    attack::AttackConfig cfg;
    cfg.de.seed = 1000 + i;
    const auto out = s.run(*model, img, nullptr, cfg);
    if (can) {
      ++attackable;
      attackable_hit += out.success;
    } else {
      unattackable_hit += out.success;
    }
  }
  const double secs = seconds_since(start);
  const double rate = attackable ? double(attackable_hit) / double(attackable) : 0.0;
  const bool pass = attackable > 0 && rate >= kBruteMinSuccess && unattackable_hit == 0 &&
                    secs < kBruteMaxSeconds;
  s.report(1, "brute-force oracle equivalence", pass,
           fmt("%zu/%zu attackable images broken (%.1f%%, need >= %.0f%%), %zu/%zu unattackable "
               "broken (need 0), %.1f s (limit %.0f s)",
               attackable_hit, attackable, 100.0 * rate, 100.0 * kBruteMinSuccess,
               unattackable_hit, images.size() - attackable, secs, kBruteMaxSeconds));
}

void patch_asymmetry(Suite& s) {
  const auto start = Clock::now();
  const auto train = synthetic::center_patch_dataset(kPatchTrain, 21);
  const auto test = synthetic::center_patch_dataset(kPatchTest, 22);
  oracle::TrainOptions to;
  to.kind = oracle::OracleKind::builtin_mlp;
  to.seed = 3;
  const auto model = oracle::train_builtin(synthetic::labeled(train), to);
  const double accuracy = model->accuracy(synthetic::labeled(test));

  std::map<Region, std::size_t> hits;
  std::size_t attacked = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (model->classify(test[i].image).argmax() != *test[i].label) continue;
    ++attacked;
    for (Region r : {Region::foreground, Region::background}) {
      attack::AttackConfig cfg;
      cfg.region = r;
      cfg.de.seed = 500 + i;
      hits[r] += s.run(*model, test[i].image, &*test[i].mask, cfg).success;
    }
  }
  const double secs = seconds_since(start);
  const double fg = attacked ? double(hits[Region::foreground]) / double(attacked) : 0.0;
  const double bg = attacked ? double(hits[Region::background]) / double(attacked) : 0.0;
  const bool pass = accuracy >= kPatchMinAccuracy && fg > 0.0 && fg >= kPatchMinRatio * bg &&
                    secs < kPatchMaxSeconds;
  s.report(3, "foreground/background asymmetry", pass,
           fmt("test accuracy %.3f (need >= %.2f); foreground %zu/%zu = %.3f, background %zu/%zu "
               "= %.3f, ratio %s (need >= %.1f); %.0f s (limit %.0f s)",
               accuracy, kPatchMinAccuracy, hits[Region::foreground], attacked, fg,
               hits[Region::background], attacked, bg,
               bg > 0.0 ? fmt("%.2f", fg / bg).c_str() : "inf", kPatchMinRatio, secs,
               kPatchMaxSeconds));
}

void targeted_semantics(Suite& s) {
  const testing::BrightestPixelOracle oracle(6, 6);
  const Image dark(6, 6);
  attack::AttackConfig cfg;
  cfg.mode = attack::AttackMode::targeted;
  cfg.target_class = 1;
  cfg.de.seed = 8;
  const auto out = s.run(oracle, dark, nullptr, cfg);

  attack::AttackRecord record;
  record.image_id = "dark";
  record.network = oracle.name();
  record.mode = cfg.mode;
  record.target = 1;
  record.outcome = out;
  const std::vector<attack::AttackRecord> records{record};
  const auto rates = metrics::success_rates(records);
  const bool pass = !out.success && out.final_label != out.original_label &&
                    rates.targeted_images == 1 && rates.untargeted2 == 0.0 &&
                    rates.targeted_successes == 0;
  s.report(8, "targeted semantics", pass,
           fmt("target 1: success=%s, original label %d, final label %d; untargeted2 = %.1f",
               out.success ? "true" : "false", out.original_label, out.final_label,
               rates.untargeted2.value_or(-1.0)));
}

void confinement_sweep(Suite& s) {
  // Random masks and budgets, small searches: widens coverage of l = 3, 5
  // and of all three regions.
  Eigen::MatrixXd w(4, 8 * 8 * 3);
  for (Eigen::Index k = 0; k < w.rows(); ++k) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(k, j) = std::sin(double(13 * k + 7 * j));
  }
  const auto model = testing::linear_oracle(8, 8, w, Eigen::VectorXd::Zero(4));
  const auto images = synthetic::random_images(60, 8, 8, 314);
  std::mt19937_64 rng(2718);
  for (std::size_t i = 0; i < images.size(); ++i) {
    RegionMask mask(8, 8);
    while (mask.count(Region::foreground) == 0 || mask.count(Region::background) == 0) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) mask.set_foreground(x, y, (rng() % 4) == 0);
      }
    }
    for (Region r : {Region::whole, Region::foreground, Region::background}) {
      for (int l : {1, 3, 5}) {
        attack::AttackConfig cfg;
        cfg.region = r;
        cfg.pixels = l;
        cfg.de.population_size = 30;
        cfg.de.max_generations = 8;
        cfg.de.seed = rng();
        s.run(*model, images[i], &mask, cfg);
      }
    }
  }
}

void region_confinement(Suite& s) {
  std::size_t violations = 0;
  std::string first;
  for (const auto& e : s.executed) {
    const auto v = testing::confinement_violation(e.outcome, e.original,
                                                  e.mask ? &*e.mask : nullptr, e.region, e.pixels);
    if (!v.empty()) {
      if (first.empty()) first = v;
      ++violations;
    }
  }
  const bool pass = s.executed.size() >= kMinConfinementOutcomes && violations == 0;
  s.report(2, "region confinement", pass,
           fmt("%zu outcomes checked (need >= %zu), %zu violations%s%s", s.executed.size(),
               kMinConfinementOutcomes, violations, first.empty() ? "" : ": ", first.c_str()));
}

void min_cut_exactness(Suite& s) {
  double worst = 0.0;
  int mismatches = 0;
  for (int i = 0; i < kCutInstances; ++i) {
    const auto inst = testing::random_cut_instance(static_cast<std::uint64_t>(i), kCutMaxUnknown);
    const auto labels = seg::min_cut(inst.data, inst.smooth.edges, inst.trimap);
    const double got = testing::direct_energy(labels, inst.data, inst.smooth.edges);
    const double best =
        testing::brute_force_min_energy(inst.data, inst.smooth.edges, inst.trimap);
    const double diff = std::abs(got - best);
    worst = std::max(worst, diff);
    if (diff > kCutTolerance) ++mismatches;
  }
  s.report(4, "min-cut exactness", mismatches == 0,
           fmt("%d/%d instances match exhaustive minimum, max |difference| %.3g (tolerance %g)",
               kCutInstances - mismatches, kCutInstances, worst, kCutTolerance));
}

void grabcut_shapes(Suite& s) {
  const auto samples = synthetic::shape_samples(kShapeImages, 2024);
  double total = 0.0;
  std::size_t non_monotone = 0;
  for (const auto& sample : samples) {
    const auto r = seg::grabcut(sample.image, sample.trimap);
    total += synthetic::iou(r.mask, sample.truth);
    if (!non_increasing(r.energies)) ++non_monotone;
  }
  const double mean = total / double(samples.size());
  s.report(5, "GrabCut synthetic segmentation", mean >= kShapeMinIou && non_monotone == 0,
           fmt("mean IoU %.4f over %zu images (need >= %.2f), %zu runs with increasing energy",
               mean, samples.size(), kShapeMinIou, non_monotone));
}

void de_properties(Suite& s) {
  auto pointwise = [](std::function<double(const de::Vector&)> f) -> de::BatchFitness {
    return [f](std::span<const de::Vector> batch) {
      std::vector<double> out;
      for (const auto& v : batch) out.push_back(f(v));
      return out;
    };
  };
  auto sphere = [](const de::Vector& v) {
    double t = 0.0;
    for (double x : v) t += x * x;
    return t;
  };
  auto rastrigin = [](const de::Vector& v) {
    double t = 10.0 * double(v.size());
    for (double x : v) t += x * x - 10.0 * std::cos(2.0 * std::numbers::pi * x);
    return t;
  };

  int converged = 0;
  for (int seed = 0; seed < kSphereSeeds; ++seed) {
    de::DeConfig c;
    c.seed = static_cast<std::uint64_t>(seed);
    c.bounds.assign(5, {-5.0, 5.0});
    const auto r = de::evolve(pointwise(sphere), c);
    s.histories.push_back(r.history);
    converged += r.best_fitness < kSphereTarget;
  }

  // LHS: 400 samples fill each of 400 equal bins exactly once, per dimension.
  de::Rng rng(77);
  const std::vector<de::Bounds> box{{0, 32}, {0, 32}, {0, 255}, {0, 255}, {0, 255}};
  const auto members = de::lhs_init(box, 400, rng);
  bool lhs_exact = true;
  for (std::size_t d = 0; d < box.size(); ++d) {
    std::vector<int> hist(400, 0);
    for (const auto& m : members) {
      const int bin = int(std::floor((m[d] - box[d].min) / ((box[d].max - box[d].min) / 400.0)));
      if (bin < 0 || bin >= 400) lhs_exact = false;
      else ++hist[std::size_t(bin)];
    }
    for (int h : hist) lhs_exact = lhs_exact && h == 1;
  }

  bool identical = true;
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    de::DeConfig c;
    c.seed = seed;
    c.bounds.assign(6, {-5.12, 5.12});
    c.population_size = 100;
    c.max_generations = 50;
    const auto serial = de::evolve(pointwise(rastrigin), c);
    c.jobs = 8;
    const auto parallel = de::evolve(pointwise(rastrigin), c);
    identical = identical && serial == parallel;
    s.histories.push_back(serial.history);
  }

  std::size_t non_monotone = 0;
  for (const auto& h : s.histories) non_monotone += !non_increasing(h);
  const bool pass = converged == kSphereSeeds && lhs_exact && identical && non_monotone == 0;
  s.report(6, "DE engine properties", pass,
           fmt("sphere %d/%d seeds below %g; LHS histogram %s; %zu/%zu histories monotone; "
               "jobs 1 vs 8 %s",
               converged, kSphereSeeds, kSphereTarget, lhs_exact ? "exact" : "NOT exact",
               s.histories.size() - non_monotone, s.histories.size(),
               identical ? "bit-identical" : "DIFFER"));
}

void metrics_correctness(Suite& s) {
  using pixelprobe::metrics::CellReport;
  const auto records = testing::metrics_fixture();
  const auto report = metrics::build_report(records);
  std::vector<std::string> wrong;
  auto check = [&](bool ok, const char* what) {
    if (!ok) wrong.emplace_back(what);
  };
  check(report.cells.size() == 2, "cell count");
  const CellReport* fg = nullptr;
  const CellReport* bg = nullptr;
  for (const auto& c : report.cells) (c.key.region == Region::foreground ? fg : bg) = &c;
  if (fg && bg) {
    check(fg->rates.untargeted1 == 0.4, "untargeted1");
    check(fg->rates.targeted == 3.0 / 16.0, "targeted");
    check(fg->rates.untargeted2 == 0.5, "untargeted2");
    check(fg->rates.confidence_u == 0.53125, "confidence_u");
    check(fg->rates.confidence_t == 0.5, "confidence_t");
    check(fg->decrease_top1_success == 0.375, "decrease top1 success");
    check(fg->decrease_top3_failure &&
              std::abs(*fg->decrease_top3_failure - 0.25 / 18.0) <= 1e-17,
          "decrease top3 failure");
    check(fg->decrease_top5_failure == 0.0, "decrease top5 failure");
    check(fg->top1_in_top3_success == 0.5, "top1 in top3 success");
    check(fg->top1_in_top5_success == 1.0, "top1 in top5 success");
    check(fg->top3_in_top3_failure && std::abs(*fg->top3_in_top3_failure - 5.0 / 6.0) <= 1e-16,
          "top3 in top3 failure");
    check(fg->top5_in_top5_failure == 1.0, "top5 in top5 failure");
    check(fg->target_histogram == std::vector<long>{2, 1, 1, 0, 0}, "target histogram");
    long mass = 0;
    for (long v : fg->target_histogram) mass += v;
    check(std::size_t(mass) == fg->rates.targeted_images, "histogram mass");
    check(fg->fitness_untargeted.mean_generations == 10.0, "mean generations untargeted");
    check(fg->fitness_targeted.mean_generations == 15.0, "mean generations targeted");
    metrics::Matrix pairs(5, std::vector<long>(5, 0));
    for (std::size_t c = 1; c <= 4; ++c) pairs[0][c] = 1;
    check(fg->class_pairs_untargeted == pairs, "untargeted class pairs");
    pairs[0][4] = 0;
    check(fg->class_pairs_targeted == pairs, "targeted class pairs");
    check(bg->rates.untargeted1 == 0.0 && !bg->rates.untargeted2 && !bg->rates.confidence_u,
          "all-failure cell");
  }

  // Image-level OR of targeted successes.
  std::map<std::string, bool> reached;
  for (const auto& r : records) {
    if (r.mode == attack::AttackMode::targeted) {
      reached[r.image_id] = reached[r.image_id] || r.outcome.success;
    }
  }
  std::size_t any = 0;
  for (const auto& [id, hit] : reached) any += hit;
  check(fg && fg->rates.untargeted2 == double(any) / double(reached.size()), "untargeted2 OR");

  std::vector<attack::AttackRecord> reread;
  for (const auto& r : records) reread.push_back(records::from_json_line(records::to_json_line(r)));
  const auto again = metrics::build_report(reread);
  check(metrics::report_json(again) == metrics::report_json(report) &&
            metrics::tables_csv(again) == metrics::tables_csv(report) &&
            metrics::heatmap_csv(again) == metrics::heatmap_csv(report) &&
            metrics::histogram_csv(again) == metrics::histogram_csv(report) &&
            metrics::fitness_csv(again) == metrics::fitness_csv(report),
        "byte-identical regeneration");

  std::string detail = fmt("%zu records, %zu cells", records.size(), report.cells.size());
  if (wrong.empty()) {
    detail += "; every hand value, the untargeted2 OR, histogram mass and regeneration match";
  } else {
    detail += "; mismatched:";
    for (const auto& w : wrong) detail += " [" + w + "]";
  }
  s.report(7, "metrics correctness", wrong.empty(), detail);
}

}  // namespace

int main() {
  Suite s;
  try {
    brute_force_equivalence(s);
    patch_asymmetry(s);
    targeted_semantics(s);
    confinement_sweep(s);
    region_confinement(s);
    min_cut_exactness(s);
    grabcut_shapes(s);
    de_properties(s);
    metrics_correctness(s);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance suite aborted: %s\n", e.what());
    return 1;
  }
  for (const auto& [id, line] : s.lines) std::printf("%s\n", line.c_str());
  std::printf("%s: %d criteria failed\n", s.failures == 0 ? "ALL PASS" : "FAILURES", s.failures);
  return s.failures == 0 ? 0 : 1;
}
