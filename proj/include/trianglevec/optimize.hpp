#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tvec {

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dims() const { return lower.size(); }
  /// Throws InvalidArgumentError unless lower < upper elementwise and finite.
  void validate() const;
};

struct DeConfig {
  int population_factor = 15;  // population = factor * dims (min 4)
  double mutation = 0.8;       // F in [0,2]
  double crossover = 0.9;      // CR in [0,1]
  int max_generations = 300;
  double tol = 1e-7;  // stop when std(pop f) <= tol * |mean(pop f)|
  std::uint64_t seed = 0;
};

struct DeResult {
  std::vector<double> x;
  double fun = 0.0;
  long evals = 0;
  int generations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;
using GenerationCallback = std::function<void(int generation, double f_best)>;

/// DE/rand/1/bin with reflection at the bounds. All random draws for a
/// generation happen before any evaluation, so candidate evaluation order
/// cannot change the trajectory.
DeResult differential_evolution(const Objective& f, const Bounds& bounds, const DeConfig& cfg,
                                const GenerationCallback& on_generation = {});

}  // namespace tvec
