#include "trianglevec/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "trianglevec/errors.hpp"
#include "trianglevec/rng.hpp"

namespace tvec {

void Bounds::validate() const {
  if (lower.empty() || lower.size() != upper.size())
    throw InvalidArgumentError("bounds must be non-empty and of equal length");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw InvalidArgumentError("bounds must be finite (dim " + std::to_string(i) + ")");
    if (!(lower[i] < upper[i]))
      throw InvalidArgumentError("lower must be < upper (dim " + std::to_string(i) + ")");
  }
}

namespace {

void validate_config(const DeConfig& cfg) {
  if (cfg.population_factor < 1) throw InvalidArgumentError("population_factor must be >= 1");
  if (cfg.mutation < 0 || cfg.mutation > 2)
    throw InvalidArgumentError("mutation factor must lie in [0, 2]");
  if (cfg.crossover < 0 || cfg.crossover > 1)
    throw InvalidArgumentError("crossover rate must lie in [0, 1]");
  if (cfg.max_generations < 0) throw InvalidArgumentError("max_generations must be >= 0");
  if (!(cfg.tol >= 0)) throw InvalidArgumentError("tol must be >= 0");
}

double reflect(double v, double lo, double hi) {
  // Mirror back into [lo, hi]; a couple of passes suffice for |F| <= 2.
  for (int i = 0; i < 8 && (v < lo || v > hi); ++i) {
    if (v < lo) v = 2.0 * lo - v;
    if (v > hi) v = 2.0 * hi - v;
  }
  return std::clamp(v, lo, hi);
}

}  // namespace

DeResult differential_evolution(const Objective& f, const Bounds& bounds, const DeConfig& cfg,
                                const GenerationCallback& on_generation) {
  bounds.validate();
  validate_config(cfg);
  const int dims = static_cast<int>(bounds.dims());
  const int pop = std::max(4, cfg.population_factor * dims);
  Rng rng(cfg.seed);

  std::vector<std::vector<double>> x(static_cast<std::size_t>(pop),
                                     std::vector<double>(static_cast<std::size_t>(dims)));
  std::vector<double> fx(static_cast<std::size_t>(pop));
  for (int i = 0; i < pop; ++i)
    for (int d = 0; d < dims; ++d)
      x[i][d] = bounds.lower[d] + rng.uniform() * (bounds.upper[d] - bounds.lower[d]);

  DeResult result;
  result.evals = 0;
  for (int i = 0; i < pop; ++i) {
    fx[i] = f(std::span<const double>(x[i]));
    ++result.evals;
  }
  int best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());

  std::vector<std::vector<double>> trials(static_cast<std::size_t>(pop),
                                          std::vector<double>(static_cast<std::size_t>(dims)));
  std::vector<double> ft(static_cast<std::size_t>(pop));

  for (int gen = 1; gen <= cfg.max_generations; ++gen) {
    // All draws happen up front; evaluations below may run in any order.
    for (int i = 0; i < pop; ++i) {
      int r1, r2, r3;
      do r1 = static_cast<int>(rng.below(static_cast<std::uint64_t>(pop)));
      while (r1 == i);
      do r2 = static_cast<int>(rng.below(static_cast<std::uint64_t>(pop)));
      while (r2 == i || r2 == r1);
      do r3 = static_cast<int>(rng.below(static_cast<std::uint64_t>(pop)));
      while (r3 == i || r3 == r1 || r3 == r2);
      const int jrand = static_cast<int>(rng.below(static_cast<std::uint64_t>(dims)));
      for (int d = 0; d < dims; ++d) {
        const bool cross = rng.uniform() < cfg.crossover || d == jrand;
        if (cross) {
          double v = x[r1][d] + cfg.mutation * (x[r2][d] - x[r3][d]);
          trials[i][d] = reflect(v, bounds.lower[d], bounds.upper[d]);
        } else {
          trials[i][d] = x[i][d];
        }
      }
    }
    for (int i = 0; i < pop; ++i) {
      ft[i] = f(std::span<const double>(trials[i]));
      ++result.evals;
    }
    for (int i = 0; i < pop; ++i) {
      if (ft[i] <= fx[i]) {
        x[i] = trials[i];
        fx[i] = ft[i];
        if (fx[i] < fx[best]) best = i;
      }
    }
    // Selection can only improve members, so re-derive best index safely.
    best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    result.generations = gen;
    if (on_generation) on_generation(gen, fx[best]);

    double mean = 0.0;
    for (double v : fx) mean += v;
    mean /= pop;
    double var = 0.0;
    for (double v : fx) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / pop);
    if (sd <= cfg.tol * std::abs(mean)) {
      result.converged = true;
      break;
    }
  }

  result.x = x[best];
  result.fun = fx[best];
  return result;
}

}  // namespace tvec
