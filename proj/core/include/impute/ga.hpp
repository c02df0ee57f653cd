#ifndef IMPUTE_GA_HPP
#define IMPUTE_GA_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "impute/rng.hpp"

namespace impute {

/// Per-gene search box in normalized space.
struct Bounds {
  std::vector<std::pair<double, double>> genes;  // (lo, hi), 0 <= lo < hi <= 1

  std::size_t size() const { return genes.size(); }
  static Bounds full(std::size_t n_genes);
};

struct GaConfig {
  int population = 50;
  int generations = 20;
  double selection_q = 0.08;    // best-rank probability for geometric selection
  double crossover_rate = 0.6;  // one-point gene-swap crossover
  double mutation_rate = 0.05;  // per-gene non-uniform mutation
  double mutation_shape = 3.0;  // annealing exponent b
  std::uint64_t seed = 0;
};

struct GaResult {
  std::vector<double> best;
  double best_error = 0.0;
  /// best_curve[0] is the initial population's best, then one entry per
  /// generation; elitism keeps it non-increasing.
  std::vector<double> best_curve;
};

/// Minimizes error_fn over the box. Normalized geometric ranking selection,
/// one-point crossover, non-uniform mutation with magnitude annealed to zero
/// at the final generation, and elitism on the single best individual.
GaResult ga_run(const std::function<double(const std::vector<double>&)>& error_fn,
                const Bounds& bounds, const GaConfig& cfg);

/// Samples `count` parent indices (with replacement) from errors ranked
/// ascending: rank r is drawn with probability q(1-q)^r / (1-(1-q)^P).
std::vector<std::size_t> select_geometric(std::size_t population, double q,
                                          std::size_t count, Rng& rng);

/// Non-uniform mutation of one gene: a fair coin picks the direction, and
/// the step is the boundary distance scaled by 1 - u^((1-gen/max_gen)^b).
double mutate_nonuniform(double gene, double lo, double hi, int gen, int max_gen,
                         double shape, Rng& rng);

}  // namespace impute

#endif
