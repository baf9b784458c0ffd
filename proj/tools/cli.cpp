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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include "CLI11.hpp"

#include "dataset.hpp"
#include "pixelprobe/attack.hpp"
#include "pixelprobe/builtin_classifiers.hpp"
#include "pixelprobe/errors.hpp"
#include "pixelprobe/http_oracle.hpp"
#include "pixelprobe/image_io.hpp"
#include "pixelprobe/metrics.hpp"
#include "pixelprobe/records.hpp"
#include "pixelprobe/segmentation.hpp"
#include "pixelprobe/synthetic.hpp"
#include "run_config.hpp"

namespace pixelprobe::cli {
namespace {

constexpr const char* kOracleUrlEnv = "PIXELPROBE_ORACLE_URL";

std::string endpoint_or_env(const std::string& endpoint) {
  if (!endpoint.empty()) return endpoint;
  if (const char* env = std::getenv(kOracleUrlEnv); env != nullptr && *env != '\0') return env;
  throw ContractViolation(std::string("no oracle endpoint: set oracle.endpoint or ") +
                          kOracleUrlEnv);
}

std::unique_ptr<oracle::Oracle> make_oracle(const OracleSpec& spec) {
  if (spec.kind == oracle::OracleKind::external) {
    return std::make_unique<oracle::HttpOracle>(endpoint_or_env(spec.endpoint));
  }
  if (spec.model.empty()) throw ContractViolation("builtin oracle needs oracle.model");
  auto model = oracle::load_builtin(spec.model);
  if (model->descriptor().kind != spec.kind) {
    throw ContractViolation("model file '" + spec.model.string() + "' holds a " +
                            std::string(oracle::to_string(model->descriptor().kind)) +
                            " classifier, config asks for " +
                            std::string(oracle::to_string(spec.kind)));
  }
  return model;
}

seg::Trimap make_trimap(const TrimapSpec& spec, const attack::DatasetEntry& entry) {
  const int h = entry.image.height();
  const int w = entry.image.width();
  if (spec.rect) {
    const auto& r = *spec.rect;
    return seg::Trimap::from_rectangle(h, w, r[0], r[1], r[2], r[3]);
  }
  if (spec.dir) {
    auto t = seg::Trimap::load(*spec.dir / entry.id);
    if (t.height() != h || t.width() != w) {
      throw LoadError("trimap for '" + entry.id + "' does not match the image size");
    }
    return t;
  }
  const int m = spec.margin;
  return seg::Trimap::from_rectangle(h, w, m, m, w - m, h - m);
}

// Runs fn(i) for i in [0, n) over `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (jobs <= 1 || n <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> threads;
  for (int t = 0; t < std::min<int>(jobs, static_cast<int>(n)); ++t) threads.emplace_back(worker);
}

bool canonical_record_less(const attack::AttackRecord& a, const attack::AttackRecord& b) {
  const int ta = a.target.value_or(-1);
  const int tb = b.target.value_or(-1);
  return std::tie(a.network, a.region, a.pixels, a.image_id, a.mode, ta) <
         std::tie(b.network, b.region, b.pixels, b.image_id, b.mode, tb);
}

// ---- segment ---------------------------------------------------------------

int cmd_segment(const std::string& config_path, int jobs_override, std::ostream& out,
                std::ostream& err) {
  const RunConfig config = load_run_config(config_path);
  if (config.dataset.empty()) throw ContractViolation("config needs 'dataset'");
  const auto masks_dir = config.masks.empty() ? config.output / "masks" : config.masks;
  const auto dataset = load_dataset(config.dataset);
  std::filesystem::create_directories(masks_dir);

  struct Result {
    std::optional<seg::GrabcutResult> result;
    std::string error;
  };
  std::vector<Result> results(dataset.size());
  const int jobs = jobs_override > 0 ? jobs_override : config.jobs;
  parallel_for(dataset.size(), jobs, [&](std::size_t i) {
    try {
      const auto trimap = make_trimap(config.trimap, dataset[i]);
      auto r = seg::grabcut(dataset[i].image, trimap, config.grabcut);
      write_mask_png(masks_dir / dataset[i].id, r.mask);
      results[i].result = std::move(r);
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });

  std::size_t failed = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = results[i];
    if (!r.result) {
      ++failed;
      err << dataset[i].id << ": error: " << r.error << '\n';
      continue;
    }
    out << dataset[i].id << ": iterations=" << r.result->iterations;
    if (r.result->degenerate) out << " (degenerate cut, kept previous labeling)";
    out << '\n';
  }
  out << "segmented " << dataset.size() - failed << "/" << dataset.size() << " images into "
      << masks_dir.string() << '\n';
  return failed == 0 ? kOk : kFailed;
}

// ---- attack ----------------------------------------------------------------

struct AttackFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string region;
  std::vector<int> pixels;
  std::string mode;
  bool verify = false;
};

int verify_records(const std::vector<attack::AttackRecord>& records,
                   const std::vector<attack::DatasetEntry>& dataset, std::ostream& out,
                   std::ostream& err) {
  std::map<std::string, const attack::DatasetEntry*> by_id;
  for (const auto& e : dataset) by_id[e.id] = &e;
  std::size_t bad = 0;
  for (const auto& r : records) {
    if (r.error) continue;
    const auto it = by_id.find(r.image_id);
    if (it == by_id.end()) {
      err << "verify: record " << r.key() << ": image not in dataset\n";
      ++bad;
      continue;
    }
    const auto& entry = *it->second;
    if (r.region != Region::whole && !entry.mask) {
      err << "verify: record " << r.key() << ": no mask to check against\n";
      ++bad;
      continue;
    }
    const auto problems =
        records::verify_record(r, entry.image, entry.mask ? &*entry.mask : nullptr);
    for (const auto& p : problems) err << "verify: record " << r.key() << ": " << p << '\n';
    if (!problems.empty()) ++bad;
  }
  out << "verified " << records.size() << " records: " << bad << " violating\n";
  return bad == 0 ? kOk : kFailed;
}

int cmd_attack(const AttackFlags& flags, std::ostream& out, std::ostream& err) {
  RunConfig config = load_run_config(flags.config);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.jobs > 0) config.jobs = flags.jobs;
  if (!flags.region.empty()) config.regions = {parse_region(flags.region)};
  if (!flags.pixels.empty()) config.pixels = flags.pixels;
  if (!flags.mode.empty()) config.modes = {attack::parse_mode(flags.mode)};
  if (config.dataset.empty()) throw ContractViolation("config needs 'dataset'");

  const bool needs_masks = std::any_of(config.regions.begin(), config.regions.end(),
                                       [](Region r) { return r != Region::whole; });
  if (needs_masks && config.masks.empty()) {
    throw ContractViolation("foreground/background attacks need 'masks'");
  }
  const auto all = load_dataset(config.dataset, needs_masks ? config.masks : std::filesystem::path{});
  if (config.samples > all.size()) {
    throw ContractViolation("samples (" + std::to_string(config.samples) +
                            ") exceeds the dataset size (" + std::to_string(all.size()) + ")");
  }
  std::vector<attack::DatasetEntry> dataset;
  for (std::size_t i : sample_indices(all.size(), config.samples, config.seed)) {
    dataset.push_back(all[i]);
  }

  std::filesystem::create_directories(config.output);
  const auto records_path = config.output / "records.jsonl";
  const auto existing = records::read_records(records_path);
  const auto done = records::record_keys(existing);

  std::unique_ptr<oracle::Oracle> oracle;
  try {
    oracle = make_oracle(config.oracle);
  } catch (const OracleUnavailable& e) {
    err << "oracle unavailable: " << e.what() << '\n';
    return kOracleDown;
  }
  out << "oracle " << oracle->name() << ": " << oracle->class_count() << " classes, "
      << oracle->input_shape().height << "x" << oracle->input_shape().width << '\n';
  if (!done.empty()) out << "resuming: " << done.size() << " attacks already on disk\n";

  std::ofstream sink(records_path, std::ios::app);
  if (!sink) throw LoadError("cannot append to " + records_path.string());
  std::size_t written = 0;
  std::size_t errors = 0;

  for (Region region : config.regions) {
    for (int pixels : config.pixels) {
      attack::AttackConfig base;
      base.region = region;
      base.pixels = pixels;
      base.de = config.de;
      attack::CampaignOptions options;
      options.seed = config.seed;
      options.jobs = config.jobs;
      options.already_done = [&](const std::string& key) { return done.count(key) > 0; };
      options.on_record = [&](const attack::AttackRecord& r) {
        sink << records::to_json_line(r) << '\n';
        sink.flush();
        ++written;
        if (r.error) {
          ++errors;
          err << "attack " << r.key() << " failed: " << *r.error << '\n';
        }
      };
      options.on_progress = [&](std::size_t index, std::string_view note) {
        out << "[" << to_string(region) << " l=" << pixels << "] " << index + 1 << "/"
            << dataset.size() << " " << dataset[index].id << ": " << note << '\n';
      };
      try {
        const auto result = attack::run_campaign(*oracle, dataset, base, config.modes, options);
        if (result.skipped_misclassified > 0) {
          out << "[" << to_string(region) << " l=" << pixels << "] skipped "
              << result.skipped_misclassified << " misclassified images\n";
        }
      } catch (const attack::AttackError& e) {
        if (!e.oracle_unavailable()) throw;
        sink.close();
        err << "oracle unavailable: " << e.what() << "\n"
            << written << " new records saved to " << records_path.string()
            << "; rerun the same command to resume\n";
        return kOracleDown;
      }
    }
  }
  sink.close();

  // Canonical order on disk, so the file does not depend on thread timing.
  auto all_records = records::read_records(records_path);
  std::stable_sort(all_records.begin(), all_records.end(), canonical_record_less);
  records::write_records(records_path, all_records);
  metrics::write_report(metrics::build_report(all_records), config.output);
  out << written << " new records, " << all_records.size() << " total; report written to "
      << config.output.string() << '\n';

  int code = errors == 0 ? kOk : kFailed;
  if (flags.verify) code = std::max(code, verify_records(all_records, all, out, err));
  return code;
}

// ---- report ----------------------------------------------------------------

int cmd_report(const std::string& records_path, std::string output, std::ostream& out) {
  if (!std::filesystem::exists(records_path)) {
    throw LoadError("records file '" + records_path + "' does not exist");
  }
  const auto recs = records::read_records(records_path);
  if (output.empty()) output = std::filesystem::path(records_path).parent_path().string();
  if (output.empty()) output = ".";
  const auto report = metrics::build_report(recs);
  metrics::write_report(report, output);
  out << "report over " << recs.size() << " records (" << report.error_count << " errors, "
      << report.cells.size() << " cells) written to " << output << '\n';
  return kOk;
}

// ---- oracle-check ----------------------------------------------------------

int cmd_oracle_check(const std::string& endpoint_flag, int count, std::uint64_t seed,
                     std::ostream& out, std::ostream& err) {
  const std::string endpoint = endpoint_or_env(endpoint_flag);
  try {
    oracle::HttpOracle oracle(endpoint);
    const auto shape = oracle.input_shape();
    out << "meta: name=" << oracle.name() << " classes=" << oracle.class_count()
        << " shape=" << shape.height << "x" << shape.width << "x3\n";
    const auto images = synthetic::random_images(static_cast<std::size_t>(count), shape.height,
                                                 shape.width, seed);
    const auto first = oracle.classify_batch(images);
    const auto second = oracle.classify_batch(images);
    std::size_t unstable = 0;
    for (std::size_t i = 0; i < first.size(); ++i) {
      for (std::size_t k = 0; k < first[i].size(); ++k) {
        if (std::abs(first[i][k] - second[i][k]) > 1e-6) {
          ++unstable;
          break;
        }
      }
    }
    out << "classified " << first.size() << " images: order and simplex checks passed\n";
    if (unstable > 0) {
      err << unstable << " images got different probabilities on a repeated request\n";
      return kFailed;
    }
    out << "repeat request agreed within 1e-6\n";
    return kOk;
  } catch (const OracleUnavailable& e) {
    err << "oracle unavailable: " << e.what() << '\n';
    return kOracleDown;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return kFailed;
  }
}

// ---- synth / train / serve -------------------------------------------------

int cmd_synth(const std::string& kind, std::size_t count, std::uint64_t seed,
              const std::filesystem::path& output, std::ostream& out) {
  if (kind == "patch" || kind == "quadrant") {
    const auto entries = kind == "patch" ? synthetic::center_patch_dataset(count, seed)
                                         : synthetic::quadrant_dataset(count, seed);
    std::vector<attack::DatasetEntry> named = entries;
    for (auto& e : named) e.id += ".png";
    write_dataset(named, output / "images", output / "masks");
  } else if (kind == "shapes") {
    const auto samples = synthetic::shape_samples(count, seed);
    std::filesystem::create_directories(output / "images");
    std::filesystem::create_directories(output / "truth");
    std::filesystem::create_directories(output / "trimaps");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::string id = std::to_string(i);
      id.insert(0, 4 - std::min<std::size_t>(4, id.size()), '0');
      id = "shape_" + id + ".png";
      write_png(output / "images" / id, samples[i].image);
      write_mask_png(output / "truth" / id, samples[i].truth);
      const auto& t = samples[i].trimap;
      GrayImage gray{t.height(), t.width(), {}};
      for (auto label : t.labels()) {
        gray.values.push_back(label == seg::TrimapLabel::background
                                  ? 0
                                  : (label == seg::TrimapLabel::unknown ? 128 : 255));
      }
      write_gray_png(output / "trimaps" / id, gray);
    }
  } else {
    throw ContractViolation("unknown synthetic dataset '" + kind + "' (patch, quadrant, shapes)");
  }
  out << "wrote " << count << " " << kind << " images under " << output.string() << '\n';
  return kOk;
}

struct TrainFlags {
  std::string dataset;
  std::string kind = "builtin-mlp";
  std::string output;
  std::uint64_t seed = 0;
  int hidden = 32;
  double l2 = 1e-3;
};

int cmd_train(const TrainFlags& flags, std::ostream& out) {
  const auto entries = load_dataset(flags.dataset);
  const auto data = synthetic::labeled(entries);
  oracle::TrainOptions options;
  options.kind = oracle::parse_oracle_kind(flags.kind);
  if (options.kind == oracle::OracleKind::external) {
    throw ContractViolation("only builtin kinds can be trained");
  }
  options.seed = flags.seed;
  options.hidden_width = flags.hidden;
  options.l2 = flags.l2;
  options.name = std::filesystem::path(flags.output).stem().string();
  const auto model = oracle::train_builtin(data, options);
  model->save(flags.output);
  out << "trained " << flags.kind << " on " << data.size()
      << " images: training accuracy " << model->accuracy(data) << ", saved to " << flags.output
      << '\n';
  return kOk;
}

int cmd_serve(const std::string& model_path, const std::string& host, int port,
              std::ostream& out) {
  const auto model = oracle::load_builtin(model_path);
  oracle::OracleServer server(*model, host);
  out << "serving " << model->name() << " on http://" << host << ":" << port << std::endl;
  server.run(port);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Region-constrained few-pixel black-box attacks"};
  app.name("pixelprobe");
  app.require_subcommand(1);

  int jobs = 0;
  std::string config_path;

  auto* segment = app.add_subcommand("segment", "GrabCut masks for every dataset image");
  segment->add_option("--config", config_path, "run configuration (JSON)")->required();
  segment->add_option("--jobs", jobs, "images segmented in parallel")->check(CLI::PositiveNumber);

  AttackFlags attack_flags;
  std::uint64_t seed_value = 0;
  auto* attack_cmd = app.add_subcommand("attack", "run attack campaigns and write the report");
  attack_cmd->add_option("--config", attack_flags.config, "run configuration (JSON)")->required();
  auto* seed_opt = attack_cmd->add_option("--seed", seed_value, "campaign seed");
  attack_cmd->add_option("--jobs", attack_flags.jobs, "images attacked in parallel")
      ->check(CLI::PositiveNumber);
  attack_cmd->add_option("--region", attack_flags.region, "whole, fg or bg")
      ->check(CLI::IsMember({"whole", "fg", "bg", "foreground", "background"}));
  attack_cmd->add_option("--pixels", attack_flags.pixels, "pixel budget l")
      ->check(CLI::IsMember({1, 3, 5}));
  attack_cmd->add_option("--mode", attack_flags.mode, "untargeted or targeted")
      ->check(CLI::IsMember({"untargeted", "targeted"}));
  attack_cmd->add_flag("--verify", attack_flags.verify,
                       "check every record against its image and mask");

  std::string records_path;
  std::string report_output;
  auto* report = app.add_subcommand("report", "rebuild report files from a records file");
  report->add_option("records", records_path, "records.jsonl")->required();
  report->add_option("--output", report_output, "output directory (default: next to records)");

  std::string endpoint;
  int check_count = 8;
  std::uint64_t check_seed = 0;
  auto* check = app.add_subcommand("oracle-check", "probe an external oracle's wire protocol");
  check->add_option("--endpoint", endpoint,
                    std::string("oracle URL (default: $") + kOracleUrlEnv + ")");
  check->add_option("--count", check_count, "images per probe batch")->check(CLI::PositiveNumber);
  check->add_option("--seed", check_seed, "seed for the probe images");

  std::string synth_kind;
  std::size_t synth_count = 100;
  std::uint64_t synth_seed = 0;
  std::string synth_output;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  synth->add_option("kind", synth_kind, "patch, quadrant or shapes")->required();
  synth->add_option("--count", synth_count, "number of images")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--output", synth_output, "output directory")->required();

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "train a builtin classifier on a dataset directory");
  train->add_option("--dataset", train_flags.dataset, "images + labels.csv")->required();
  train->add_option("--kind", train_flags.kind, "builtin-linear or builtin-mlp")
      ->check(CLI::IsMember({"builtin-linear", "builtin-mlp"}));
  train->add_option("--output", train_flags.output, "model JSON to write")->required();
  train->add_option("--seed", train_flags.seed, "initialization seed");
  train->add_option("--hidden", train_flags.hidden, "MLP hidden width")
      ->check(CLI::PositiveNumber);
  train->add_option("--l2", train_flags.l2, "weight decay");

  std::string serve_model;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "serve a builtin classifier over the wire protocol");
  serve->add_option("--model", serve_model, "model JSON")->required();
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--port", serve_port, "port");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*segment) return cmd_segment(config_path, jobs, out, err);
    if (*attack_cmd) {
      if (*seed_opt) attack_flags.seed = seed_value;
      return cmd_attack(attack_flags, out, err);
    }
    if (*report) return cmd_report(records_path, report_output, out);
    if (*check) return cmd_oracle_check(endpoint, check_count, check_seed, out, err);
    if (*synth) return cmd_synth(synth_kind, synth_count, synth_seed, synth_output, out);
    if (*train) return cmd_train(train_flags, out);
    if (*serve) return cmd_serve(serve_model, serve_host, serve_port, out);
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const OracleUnavailable& e) {
    err << "oracle unavailable: " << e.what() << '\n';
    return kOracleDown;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace pixelprobe::cli
