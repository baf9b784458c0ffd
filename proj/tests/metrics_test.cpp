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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "pixelprobe/errors.hpp"
#include "pixelprobe/metrics.hpp"
#include "pixelprobe/records.hpp"
#include "support/metrics_fixture.hpp"

namespace pixelprobe::metrics {
namespace {

using testing::metrics_fixture;

const CellReport& cell(const CampaignReport& report, Region region) {
  for (const auto& c : report.cells) {
    if (c.key.region == region) return c;
  }
  throw std::runtime_error("missing cell");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// tables.csv rows keyed by region, each a column-name -> field map.
std::map<std::string, std::map<std::string, std::string>> table_rows(const std::string& csv) {
  const auto lines = split(csv, '\n');
  const auto header = split(lines.at(0), ',');
  std::map<std::string, std::map<std::string, std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split(lines[i], ',');
    EXPECT_EQ(fields.size(), header.size()) << lines[i];
    auto& row = rows[fields.at(1)];
    for (std::size_t c = 0; c < header.size() && c < fields.size(); ++c) row[header[c]] = fields[c];
  }
  return rows;
}

TEST(ConfidenceDecrease, HandExamples) {
  const ClassProbabilities pre({0.5, 0.3, 0.2});
  const ClassProbabilities post({0.2, 0.3, 0.5});
  EXPECT_DOUBLE_EQ(confidence_decrease(pre, post, 1), 0.3);
  EXPECT_DOUBLE_EQ(confidence_decrease(pre, post, 2), 0.15);
  EXPECT_NEAR(confidence_decrease(pre, post, 3), 0.0, 1e-16);
  EXPECT_THROW(confidence_decrease(pre, post, 0), ContractViolation);
  EXPECT_THROW(confidence_decrease(pre, post, 4), ContractViolation);
  EXPECT_THROW(confidence_decrease(pre, ClassProbabilities({0.5, 0.5}), 1), ContractViolation);
}

TEST(ConfidenceDecrease, MatchesIndependentRecomputation) {
  std::mt19937_64 rng(10);
  std::gamma_distribution<double> g(1.0, 1.0);
  auto draw = [&] {
    std::vector<double> v(10);
    double s = 0.0;
    for (auto& x : v) s += (x = g(rng));
    for (auto& x : v) x /= s;
    return v;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto pre = draw();
    const auto post = draw();
    std::vector<int> order(10);
    for (int i = 0; i < 10; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return pre[static_cast<std::size_t>(a)] > pre[static_cast<std::size_t>(b)];
    });
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
      const auto c = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
      expected += pre[c] - post[c];
    }
    expected /= 3.0;
    EXPECT_NEAR(confidence_decrease(ClassProbabilities(pre), ClassProbabilities(post), 3),
                expected, 1e-15);
  }
}

TEST(RankRetention, HandExamples) {
  const ClassProbabilities pre({0.4, 0.3, 0.2, 0.1});
  EXPECT_TRUE(retains_rank(pre, ClassProbabilities({0.1, 0.2, 0.3, 0.4}), 1, 4));
  EXPECT_FALSE(retains_rank(pre, ClassProbabilities({0.1, 0.2, 0.3, 0.4}), 1, 3));
  EXPECT_TRUE(retains_rank(pre, ClassProbabilities({0.3, 0.4, 0.2, 0.1}), 2, 2));
  // Tie at the boundary: class 2 outranks class 3 by index.
  EXPECT_TRUE(retains_rank(pre, ClassProbabilities({0.3, 0.3, 0.2, 0.2}), 3, 3));
  EXPECT_THROW(retains_rank(pre, pre, 3, 2), ContractViolation);
  EXPECT_THROW(retains_rank(pre, pre, 0, 2), ContractViolation);
  EXPECT_THROW(retains_rank(pre, pre, 1, 5), ContractViolation);
}

TEST(FitnessSummary, PadsShortHistoriesWithTheirLastValue) {
  auto records = metrics_fixture();
  std::vector<AttackRecord> two{records[0], records[4]};
  two[0].outcome.fitness_history = {3.0, 2.0, 1.0};
  two[1].outcome.fitness_history = {5.0, 4.0};
  const auto s = fitness_summary(two);
  EXPECT_EQ(s.mean_curve, (std::vector<double>{4.0, 3.0, 2.5}));
  EXPECT_EQ(s.mean_generations, 3.0);  // only records[0] succeeded
  EXPECT_EQ(fitness_summary({}).mean_curve, std::vector<double>{});
  EXPECT_FALSE(fitness_summary({}).mean_generations);
}

TEST(Fixture, SuccessRatesAndConfidence) {
  const auto report = build_report(metrics_fixture());
  EXPECT_EQ(report.record_count, 30u);
  EXPECT_EQ(report.error_count, 0u);
  ASSERT_EQ(report.cells.size(), 2u);
  const auto& fg = cell(report, Region::foreground);
  EXPECT_EQ(fg.class_count, 5u);
  EXPECT_EQ(fg.rates.untargeted_attempts, 10u);
  EXPECT_EQ(fg.rates.untargeted_successes, 4u);
  EXPECT_EQ(fg.rates.untargeted1, 0.4);
  EXPECT_EQ(fg.rates.targeted_attempts, 16u);
  EXPECT_EQ(fg.rates.targeted_successes, 3u);
  EXPECT_EQ(fg.rates.targeted, 3.0 / 16.0);
  EXPECT_EQ(fg.rates.targeted_images, 4u);
  EXPECT_EQ(fg.rates.targeted_images_reached, 2u);
  EXPECT_EQ(fg.rates.untargeted2, 0.5);
  EXPECT_EQ(fg.rates.confidence_u, 0.53125);
  EXPECT_EQ(fg.rates.confidence_t, 0.5);
}

TEST(Fixture, ConfidenceDecreaseAndRankRetention) {
  const auto report = build_report(metrics_fixture());
  const auto& fg = cell(report, Region::foreground);
  EXPECT_EQ(fg.decrease_top1_success, 0.375);
  ASSERT_TRUE(fg.decrease_top3_failure);
  EXPECT_DOUBLE_EQ(*fg.decrease_top3_failure, 0.25 / 18.0);
  EXPECT_EQ(fg.decrease_top5_failure, 0.0);
  EXPECT_EQ(fg.top1_in_top3_success, 0.5);
  EXPECT_EQ(fg.top1_in_top5_success, 1.0);
  ASSERT_TRUE(fg.top3_in_top3_failure);
  EXPECT_DOUBLE_EQ(*fg.top3_in_top3_failure, 5.0 / 6.0);
  EXPECT_EQ(fg.top5_in_top5_failure, 1.0);
}

TEST(Fixture, ClassPairsHistogramAndGenerations) {
  const auto report = build_report(metrics_fixture());
  const auto& fg = cell(report, Region::foreground);
  Matrix untargeted(5, std::vector<long>(5, 0));
  for (int c = 1; c <= 4; ++c) untargeted[0][static_cast<std::size_t>(c)] = 1;
  EXPECT_EQ(fg.class_pairs_untargeted, untargeted);
  Matrix targeted(5, std::vector<long>(5, 0));
  for (int c = 1; c <= 3; ++c) targeted[0][static_cast<std::size_t>(c)] = 1;
  EXPECT_EQ(fg.class_pairs_targeted, targeted);
  EXPECT_EQ(fg.target_histogram, (std::vector<long>{2, 1, 1, 0, 0}));
  EXPECT_EQ(fg.fitness_untargeted.mean_generations, 10.0);
  EXPECT_EQ(fg.fitness_targeted.mean_generations, 15.0);
  EXPECT_EQ(fg.fitness_untargeted.mean_curve.size(), 101u);
}

TEST(Fixture, AllFailureCellHasUndefinedRates) {
  const auto report = build_report(metrics_fixture());
  const auto& bg = cell(report, Region::background);
  EXPECT_EQ(bg.rates.untargeted_attempts, 4u);
  EXPECT_EQ(bg.rates.untargeted1, 0.0);
  EXPECT_FALSE(bg.rates.confidence_u);
  EXPECT_FALSE(bg.rates.targeted);
  EXPECT_FALSE(bg.rates.untargeted2);
  EXPECT_FALSE(bg.decrease_top1_success);
  EXPECT_FALSE(bg.top1_in_top3_success);
  EXPECT_EQ(bg.decrease_top3_failure, 0.0);
  EXPECT_EQ(bg.top3_in_top3_failure, 1.0);
  EXPECT_EQ(bg.target_histogram, (std::vector<long>(5, 0)));
  EXPECT_FALSE(bg.fitness_untargeted.mean_generations);
}

TEST(Fixture, Untargeted2IsTheImageLevelOr) {
  const auto records = metrics_fixture();
  std::map<std::string, bool> reached;
  for (const auto& r : records) {
    if (r.mode != attack::AttackMode::targeted) continue;
    reached[r.image_id] = reached[r.image_id] || r.outcome.success;
  }
  const double expected = static_cast<double>(std::count_if(
                              reached.begin(), reached.end(), [](auto& p) { return p.second; })) /
                          static_cast<double>(reached.size());
  const auto report = build_report(records);
  EXPECT_EQ(cell(report, Region::foreground).rates.untargeted2, expected);
}

TEST(Fixture, HistogramMassIsImageCount) {
  const auto report = build_report(metrics_fixture());
  const auto& fg = cell(report, Region::foreground);
  long mass = 0;
  for (long v : fg.target_histogram) mass += v;
  EXPECT_EQ(static_cast<std::size_t>(mass), fg.rates.targeted_images);
}

TEST(Fixture, TablesCsvCarriesTheHandValues) {
  const auto rows = table_rows(tables_csv(build_report(metrics_fixture())));
  const auto& fg = rows.at("foreground");
  EXPECT_EQ(fg.at("network"), "net");
  EXPECT_EQ(fg.at("untargeted1"), "0.4");
  EXPECT_EQ(fg.at("targeted"), "0.1875");
  EXPECT_EQ(fg.at("untargeted2"), "0.5");
  EXPECT_EQ(fg.at("confidence_u"), "0.53125");
  EXPECT_EQ(fg.at("decrease_top1_success"), "0.375");
  EXPECT_DOUBLE_EQ(std::stod(fg.at("decrease_top3_failure")), 0.25 / 18.0);
  EXPECT_EQ(fg.at("top1_in_top3_success"), "0.5");
  EXPECT_EQ(fg.at("mean_generations_untargeted"), "10");
  const auto& bg = rows.at("background");
  EXPECT_EQ(bg.at("untargeted1"), "0");
  EXPECT_EQ(bg.at("targeted"), "");
  EXPECT_EQ(bg.at("confidence_u"), "");
}

TEST(Report, IndependentOfRecordOrder) {
  auto records = metrics_fixture();
  const auto reference = build_report(records);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(records.begin(), records.end(), rng);
    const auto shuffled = build_report(records);
    EXPECT_EQ(shuffled, reference);
    EXPECT_EQ(report_json(shuffled), report_json(reference));
    EXPECT_EQ(tables_csv(shuffled), tables_csv(reference));
    EXPECT_EQ(fitness_csv(shuffled), fitness_csv(reference));
  }
}

TEST(Report, RegenerationFromRecordsIsByteIdentical) {
  const auto records = metrics_fixture();
  std::vector<AttackRecord> reread;
  for (const auto& r : records) reread.push_back(records::from_json_line(records::to_json_line(r)));
  const auto a = build_report(records);
  const auto b = build_report(reread);
  EXPECT_EQ(report_json(a), report_json(b));
  EXPECT_EQ(tables_csv(a), tables_csv(b));
  EXPECT_EQ(heatmap_csv(a), heatmap_csv(b));
  EXPECT_EQ(histogram_csv(a), histogram_csv(b));
  EXPECT_EQ(fitness_csv(a), fitness_csv(b));
}

TEST(Report, ErrorRecordsAreCountedButNotAggregated) {
  auto records = metrics_fixture();
  AttackRecord broken = records[0];
  broken.image_id = "zz";
  broken.error = "timeout";
  records.push_back(broken);
  const auto report = build_report(records);
  EXPECT_EQ(report.record_count, 31u);
  EXPECT_EQ(report.error_count, 1u);
  EXPECT_EQ(cell(report, Region::foreground).rates.untargeted_attempts, 10u);
}

TEST(Report, EmptyInput) {
  const auto report = build_report({});
  EXPECT_TRUE(report.cells.empty());
  EXPECT_EQ(split(tables_csv(report), '\n').size(), 2u);  // header + trailing newline
}

TEST(Report, AdditiveOverDisjointCells) {
  // Cells are independent folds: building the two halves separately gives
  // the same per-cell values as building them together.
  const auto records = metrics_fixture();
  std::vector<AttackRecord> fg, bg;
  for (const auto& r : records) (r.region == Region::foreground ? fg : bg).push_back(r);
  const auto all = build_report(records);
  EXPECT_EQ(build_report(fg).cells.at(0), cell(all, Region::foreground));
  EXPECT_EQ(build_report(bg).cells.at(0), cell(all, Region::background));
}

TEST(Heatmap, LongFormCountsSuccessfulPairs) {
  const auto csv = heatmap_csv(build_report(metrics_fixture()));
  EXPECT_NE(csv.find("net,foreground,1,untargeted,0,4,1"), std::string::npos);
  EXPECT_NE(csv.find("net,foreground,1,targeted,0,3,1"), std::string::npos);
  EXPECT_EQ(csv.find("net,foreground,1,targeted,0,4,1"), std::string::npos);
}

}  // namespace
}  // namespace pixelprobe::metrics
