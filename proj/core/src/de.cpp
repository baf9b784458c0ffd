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

#include "pixelprobe/de.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "pixelprobe/errors.hpp"

namespace pixelprobe::de {
namespace {

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

void require_bounds(std::span<const Bounds> bounds) {
  if (bounds.empty()) throw ContractViolation("DE needs at least one dimension");
  for (const auto& b : bounds) {
    if (!(b.min < b.max)) throw ContractViolation("bounds require min < max in every dimension");
  }
}

std::vector<double> evaluate(const BatchFitness& fitness, std::span<const Vector> batch,
                             int jobs) {
  std::vector<double> out(batch.size());
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, batch.size());

  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    auto values = fitness(batch.subspan(begin, end - begin));
    if (values.size() != end - begin) {
      throw ContractViolation("fitness returned " + std::to_string(values.size()) +
                              " values for a batch of " + std::to_string(end - begin));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[begin + i] = std::isnan(values[i]) ? std::numeric_limits<double>::infinity() : values[i];
    }
  };

  if (workers <= 1) {
    run_chunk(0, batch.size());
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = batch.size() * w / workers;
      const std::size_t end = batch.size() * (w + 1) / workers;
      threads.emplace_back([&, w, begin, end] {
        try {
          run_chunk(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::size_t best_index(const std::vector<double>& fitnesses) {
  return static_cast<std::size_t>(std::min_element(fitnesses.begin(), fitnesses.end()) -
                                  fitnesses.begin());
}

}  // namespace

void DeConfig::validate() const {
  if (population_size < 4) {
    throw ContractViolation("population size must be at least 4 (got " +
                            std::to_string(population_size) + ")");
  }
  if (max_generations < 1) throw ContractViolation("max_generations must be positive");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ContractViolation("crossover rate must lie in [0, 1]");
  }
  if (!(mutation.lo >= 0.0 && mutation.hi <= 2.0 && mutation.lo <= mutation.hi)) {
    throw ContractViolation("mutation factor range must satisfy 0 <= lo <= hi <= 2");
  }
  if (jobs < 1) throw ContractViolation("jobs must be positive");
  require_bounds(bounds);
}

void clamp_to_bounds(Vector& v, std::span<const Bounds> bounds) {
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = std::clamp(v[j], bounds[j].min, bounds[j].max);
}

std::vector<Vector> lhs_init(std::span<const Bounds> bounds, int population_size, Rng& rng) {
  if (population_size < 1) throw ContractViolation("LHS needs a positive sample count");
  require_bounds(bounds);
  const auto p = static_cast<std::size_t>(population_size);
  std::vector<Vector> members(p, Vector(bounds.size()));
  std::vector<std::size_t> strata(p);
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    const double width = (bounds[j].max - bounds[j].min) / static_cast<double>(p);
    for (std::size_t i = 0; i < p; ++i) {
      double v = bounds[j].min + (static_cast<double>(strata[i]) + uniform01(rng)) * width;
      // Guard the half-open upper edge against rounding.
      members[i][j] = std::min(v, std::nextafter(bounds[j].max, bounds[j].min));
    }
  }
  return members;
}

Vector mutate_with(std::span<const Vector> members, std::size_t r1, std::size_t r2,
                   std::size_t r3, double f, std::span<const Bounds> bounds) {
  const auto& a = members[r1];
  const auto& b = members[r2];
  const auto& c = members[r3];
  Vector v(a.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = a[j] + f * (b[j] - c[j]);
  clamp_to_bounds(v, bounds);
  return v;
}

Vector mutate(std::span<const Vector> members, std::size_t i, double f,
              std::span<const Bounds> bounds, Rng& rng) {
  const std::size_t p = members.size();
  if (p < 4) throw ContractViolation("mutation needs at least 4 members");
  if (i >= p) throw ContractViolation("member index out of range");
  std::size_t r[3];
  for (int k = 0; k < 3; ++k) {
    std::size_t candidate;
    do {
      candidate = uniform_index(rng, p);
    } while (candidate == i || std::find(r, r + k, candidate) != r + k);
    r[k] = candidate;
  }
  return mutate_with(members, r[0], r[1], r[2], f, bounds);
}

Vector crossover(std::span<const double> target, std::span<const double> mutant,
                 double crossover_rate, Rng& rng) {
  if (target.size() != mutant.size() || target.empty()) {
    throw ContractViolation("crossover needs equal, non-empty dimensions");
  }
  const std::size_t forced = uniform_index(rng, target.size());
  Vector trial(target.begin(), target.end());
  for (std::size_t j = 0; j < trial.size(); ++j) {
    if (uniform01(rng) <= crossover_rate || j == forced) trial[j] = mutant[j];
  }
  return trial;
}

EvolveResult evolve(const BatchFitness& fitness, const DeConfig& config,
                    const EarlyStop& early_stop) {
  config.validate();
  Rng rng(config.seed);
  const std::span<const Bounds> bounds = config.bounds;

  EvolveResult result;
  Population pop;
  pop.members = lhs_init(bounds, config.population_size, rng);

  auto evaluate_or_throw = [&](std::span<const Vector> batch, int generation) {
    try {
      return evaluate(fitness, batch, config.jobs);
    } catch (const std::exception& e) {
      throw EvolveError("fitness evaluation failed in generation " +
                            std::to_string(generation) + " (members 0.." +
                            std::to_string(batch.size() - 1) + "): " + e.what(),
                        generation, result.history, std::current_exception());
    }
  };

  pop.fitnesses = evaluate_or_throw(pop.members, pop.generation);
  std::size_t best = best_index(pop.fitnesses);
  result.history.push_back(pop.fitnesses[best]);

  auto should_stop = [&] {
    if (!early_stop) return false;
    try {
      return early_stop(pop.members[best], pop.fitnesses[best]);
    } catch (const std::exception& e) {
      throw EvolveError("early-stop check failed in generation " +
                            std::to_string(pop.generation) + ": " + e.what(),
                        pop.generation, result.history, std::current_exception());
    }
  };

  if (should_stop()) {
    result.stopped_early = true;
  } else {
    const std::size_t p = pop.members.size();
    std::vector<Vector> trials(p);
    for (int g = 1; g <= config.max_generations; ++g) {
      const double f = config.mutation.dithered()
                           ? config.mutation.lo +
                                 (config.mutation.hi - config.mutation.lo) * uniform01(rng)
                           : config.mutation.lo;
      for (std::size_t i = 0; i < p; ++i) {
        const Vector mutant = mutate(pop.members, i, f, bounds, rng);
        trials[i] = crossover(pop.members[i], mutant, config.crossover_rate, rng);
      }
      const auto trial_fitness = evaluate_or_throw(trials, pop.generation + 1);
      for (std::size_t i = 0; i < p; ++i) {
        if (trial_fitness[i] < pop.fitnesses[i]) {
          pop.members[i] = std::move(trials[i]);
          pop.fitnesses[i] = trial_fitness[i];
        }
      }
      ++pop.generation;
      best = best_index(pop.fitnesses);
      result.history.push_back(pop.fitnesses[best]);
      result.generations_run = g;
      if (should_stop()) {
        result.stopped_early = true;
        break;
      }
    }
  }

  result.best_member = pop.members[best];
  result.best_fitness = pop.fitnesses[best];
  return result;
}

}  // namespace pixelprobe::de
