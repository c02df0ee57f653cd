#include "impute/ga.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

#include "impute/errors.hpp"

namespace impute {

Bounds Bounds::full(std::size_t n_genes) {
  Bounds b;
  b.genes.assign(n_genes, {0.0, 1.0});
  return b;
}

std::vector<std::size_t> select_geometric(std::size_t population, double q,
                                          std::size_t count, Rng& rng) {
  if (population == 0) throw InputError("select_geometric: empty population");
  if (!(q > 0.0 && q < 1.0)) throw InputError("select_geometric: q must be in (0,1)");

  // cumulative normalized geometric distribution over ranks
  std::vector<double> cum(population);
  const double norm = 1.0 - std::pow(1.0 - q, static_cast<double>(population));
  double acc = 0.0;
  double term = q / norm;
  for (std::size_t r = 0; r < population; ++r) {
    acc += term;
    cum[r] = acc;
    term *= 1.0 - q;
  }
  cum.back() = 1.0;

  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform();
    out[i] = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
  }
  return out;
}

double mutate_nonuniform(double gene, double lo, double hi, int gen, int max_gen,
                         double shape, Rng& rng) {
  const bool toward_hi = rng.uniform() < 0.5;
  const double u = rng.uniform();
  const double anneal = std::pow(1.0 - static_cast<double>(gen) / static_cast<double>(max_gen),
                                 shape);
  const double frac = 1.0 - std::pow(u, anneal);
  const double mutated =
      toward_hi ? gene + (hi - gene) * frac : gene - (gene - lo) * frac;
  return std::clamp(mutated, lo, hi);
}

namespace {

struct Individual {
  std::vector<double> genes;
  double error = 0.0;
};

double checked_error(const std::function<double(const std::vector<double>&)>& error_fn,
                     const std::vector<double>& genes, const Bounds& bounds) {
#ifndef NDEBUG
  for (std::size_t g = 0; g < genes.size(); ++g)
    assert(genes[g] >= bounds.genes[g].first && genes[g] <= bounds.genes[g].second);
#else
  (void)bounds;
#endif
  const double e = error_fn(genes);
  if (!std::isfinite(e)) {
    std::ostringstream msg;
    msg << "ga_run: error function returned non-finite value at (";
    for (std::size_t i = 0; i < genes.size(); ++i) {
      if (i) msg << ", ";
      msg << genes[i];
    }
    msg << ")";
    throw NumericError(msg.str());
  }
  return e;
}

void rank_ascending(std::vector<Individual>& pop) {
  std::stable_sort(pop.begin(), pop.end(),
                   [](const Individual& a, const Individual& b) { return a.error < b.error; });
}

}  // namespace

GaResult ga_run(const std::function<double(const std::vector<double>&)>& error_fn,
                const Bounds& bounds, const GaConfig& cfg) {
  if (bounds.size() == 0) throw InputError("ga_run: empty bounds");
  for (const auto& [lo, hi] : bounds.genes)
    if (!(0.0 <= lo && lo < hi && hi <= 1.0))
      throw InputError("ga_run: invalid gene bounds [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  if (cfg.population < 2) throw InputError("ga_run: population must be >= 2");
  if (cfg.generations < 1) throw InputError("ga_run: generations must be >= 1");
  for (double rate : {cfg.crossover_rate, cfg.mutation_rate})
    if (rate < 0.0 || rate > 1.0) throw InputError("ga_run: operator rate outside [0,1]");

  Rng rng = Rng::stream(cfg.seed, "ga");
  const std::size_t n_genes = bounds.size();
  const std::size_t pop_size = static_cast<std::size_t>(cfg.population);

  std::vector<Individual> pop(pop_size);
  for (auto& ind : pop) {
    ind.genes.resize(n_genes);
    for (std::size_t g = 0; g < n_genes; ++g)
      ind.genes[g] = rng.uniform(bounds.genes[g].first, bounds.genes[g].second);
    ind.error = checked_error(error_fn, ind.genes, bounds);
  }
  rank_ascending(pop);

  GaResult result;
  result.best_curve.push_back(pop.front().error);

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Individual> next;
    next.reserve(pop_size);
    next.push_back(pop.front());  // elite carries over unchanged

    while (next.size() < pop_size) {
      const auto parents = select_geometric(pop_size, cfg.selection_q, 2, rng);
      Individual a = pop[parents[0]];
      Individual b = pop[parents[1]];

      if (n_genes > 1 && rng.uniform() < cfg.crossover_rate) {
        const std::size_t cut = 1 + rng.index(n_genes - 1);
        for (std::size_t g = cut; g < n_genes; ++g) std::swap(a.genes[g], b.genes[g]);
      }
      for (Individual* child : {&a, &b}) {
        for (std::size_t g = 0; g < n_genes; ++g) {
          if (rng.uniform() < cfg.mutation_rate) {
            child->genes[g] = mutate_nonuniform(child->genes[g], bounds.genes[g].first,
                                                bounds.genes[g].second, gen,
                                                cfg.generations, cfg.mutation_shape, rng);
          }
        }
      }
      a.error = checked_error(error_fn, a.genes, bounds);
      next.push_back(std::move(a));
      if (next.size() < pop_size) {
        b.error = checked_error(error_fn, b.genes, bounds);
        next.push_back(std::move(b));
      }
    }
    pop = std::move(next);
    rank_ascending(pop);
    result.best_curve.push_back(pop.front().error);
  }

  result.best = pop.front().genes;
  result.best_error = pop.front().error;
  return result;
}

}  // namespace impute
