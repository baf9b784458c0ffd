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

#ifndef PIXELPROBE_DE_HPP
#define PIXELPROBE_DE_HPP

#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pixelprobe::de {

using Rng = std::mt19937_64;
using Vector = std::vector<double>;

struct Bounds {
  double min = 0.0;
  double max = 1.0;
};

/// Mutation factor F drawn uniformly from [lo, hi) once per generation.
/// lo == hi gives a fixed F.
struct MutationFactor {
  double lo = 0.5;
  double hi = 1.0;

  static MutationFactor fixed(double f) { return {f, f}; }
  bool dithered() const { return hi > lo; }
};

struct DeConfig {
  int population_size = 400;
  int max_generations = 100;
  double crossover_rate = 0.7;
  MutationFactor mutation{};
  std::uint64_t seed = 0;
  std::vector<Bounds> bounds;
  // Worker threads used to evaluate a generation's trial batch. Has no effect
  // on results: all random draws happen before dispatch.
  int jobs = 1;

  /// Throws ContractViolation when any field is out of its domain.
  void validate() const;
};

/// Evaluates a batch of vectors; must return one value per input, in order.
/// Lower is better.
using BatchFitness = std::function<std::vector<double>(std::span<const Vector>)>;

/// Consulted after initialization and after each full generation with the
/// current best member. Returning true stops the run.
using EarlyStop = std::function<bool(std::span<const double> best, double best_fitness)>;

struct Population {
  int generation = 1;
  std::vector<Vector> members;
  std::vector<double> fitnesses;
};

struct EvolveResult {
  Vector best_member;
  double best_fitness = 0.0;
  // Evolution generations performed after initialization (0..max_generations).
  int generations_run = 0;
  // Best fitness after initialization, then after each generation; always
  // generations_run + 1 entries.
  std::vector<double> history;
  bool stopped_early = false;

  friend bool operator==(const EvolveResult&, const EvolveResult&) = default;
};

/// A fitness evaluation failed. Carries where it happened and the best-fitness
/// history accumulated so far.
class EvolveError : public std::runtime_error {
 public:
  EvolveError(const std::string& what, int generation, std::vector<double> partial_history,
              std::exception_ptr cause)
      : std::runtime_error(what), generation_(generation),
        partial_history_(std::move(partial_history)), cause_(std::move(cause)) {}

  int generation() const { return generation_; }
  const std::vector<double>& partial_history() const { return partial_history_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  int generation_;
  std::vector<double> partial_history_;
  std::exception_ptr cause_;
};

/// Latin hypercube sample: in every dimension the P values fall one per
/// equal-width stratum, with the strata order shuffled independently per
/// dimension.
std::vector<Vector> lhs_init(std::span<const Bounds> bounds, int population_size, Rng& rng);

/// x[r1] + F * (x[r2] - x[r3]) for explicit indices, clamped to bounds.
Vector mutate_with(std::span<const Vector> members, std::size_t r1, std::size_t r2,
                   std::size_t r3, double f, std::span<const Bounds> bounds);

/// DE/rand/1 mutant for member i; r1, r2, r3 are distinct and differ from i.
Vector mutate(std::span<const Vector> members, std::size_t i, double f,
              std::span<const Bounds> bounds, Rng& rng);

/// Binomial crossover. One uniformly chosen dimension always comes from the
/// mutant; every other dimension does with probability `crossover_rate`.
Vector crossover(std::span<const double> target, std::span<const double> mutant,
                 double crossover_rate, Rng& rng);

EvolveResult evolve(const BatchFitness& fitness, const DeConfig& config,
                    const EarlyStop& early_stop = {});

/// Clamp every coordinate of v into its bounds.
void clamp_to_bounds(Vector& v, std::span<const Bounds> bounds);

}  // namespace pixelprobe::de

#endif  // PIXELPROBE_DE_HPP
