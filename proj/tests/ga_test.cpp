#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "impute/errors.hpp"
#include "impute/ga.hpp"

using namespace impute;

namespace {

GaConfig defaults_with_seed(std::uint64_t seed) {
  GaConfig cfg;
  cfg.seed = seed;
  return cfg;
}

double quadratic(const std::vector<double>& x) {
  return (x[0] - 0.3) * (x[0] - 0.3);
}

}  // namespace

TEST_CASE("geometric selection matches its closed-form distribution") {
  Rng rng(77);
  const std::size_t population = 10;
  const double q = 0.3;
  const std::size_t draws = 100000;
  std::vector<long long> counts(population, 0);
  for (std::size_t idx : select_geometric(population, q, draws, rng)) ++counts[idx];

  const double norm = 1.0 - std::pow(1.0 - q, double(population));
  for (std::size_t r = 0; r < population; ++r) {
    const double p = q * std::pow(1.0 - q, double(r)) / norm;
    const double freq = double(counts[r]) / double(draws);
    const double sigma = std::sqrt(p * (1.0 - p) / double(draws));
    CHECK(std::abs(freq - p) < 4.0 * sigma + 1e-5);
  }
}

TEST_CASE("near-deterministic selection at high q") {
  Rng rng(78);
  std::size_t best = 0;
  const auto picks = select_geometric(10, 0.99, 100000, rng);
  for (std::size_t idx : picks)
    if (idx == 0) ++best;
  const double freq = double(best) / double(picks.size());
  // closed form: rank-0 probability is 0.99 / (1 - 0.01^10) ~= 0.99
  CHECK(freq > 0.985);
  CHECK(std::abs(freq - 0.99) < 4.0 * std::sqrt(0.99 * 0.01 / 100000.0));
}

TEST_CASE("selection from a single-individual population always yields index 0") {
  Rng rng(79);
  for (std::size_t idx : select_geometric(1, 0.08, 100, rng)) CHECK(idx == 0);
}

TEST_CASE("non-uniform mutation anneals to zero at the final generation") {
  Rng rng(80);
  for (int i = 0; i < 100; ++i)
    CHECK(mutate_nonuniform(0.4, 0.0, 1.0, 20, 20, 3.0, rng) == 0.4);
}

TEST_CASE("mutation respects the boundaries") {
  Rng rng(81);
  bool saw_unchanged = false;
  for (int i = 0; i < 200; ++i) {
    const double g = mutate_nonuniform(0.0, 0.0, 1.0, 1, 20, 3.0, rng);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
    if (g == 0.0) saw_unchanged = true;  // the toward-lo direction is a no-op at lo
  }
  CHECK(saw_unchanged);
}

TEST_CASE("mutation magnitude shrinks across generations") {
  Rng rng(82);
  const auto median_step = [&rng](int gen) {
    std::vector<double> steps;
    for (int i = 0; i < 10000; ++i)
      steps.push_back(std::abs(mutate_nonuniform(0.5, 0.0, 1.0, gen, 20, 3.0, rng) - 0.5));
    std::nth_element(steps.begin(), steps.begin() + steps.size() / 2, steps.end());
    return steps[steps.size() / 2];
  };
  CHECK(median_step(0) > median_step(10));
}

TEST_CASE("ga converges on the quadratic benchmark") {
  Bounds bounds = Bounds::full(1);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GaResult r = ga_run(quadratic, bounds, defaults_with_seed(seed));
    total += std::abs(r.best[0] - 0.3);
  }
  CHECK(total / 10.0 < 0.02);
}

TEST_CASE("bounds are always respected even when the optimum lies outside") {
  Bounds bounds;
  bounds.genes = {{0.4, 0.6}};
  const auto error_fn = [](const std::vector<double>& x) {
    return (x[0] - 0.1) * (x[0] - 0.1);
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GaResult r = ga_run(error_fn, bounds, defaults_with_seed(seed));
    CHECK(r.best[0] >= 0.4);
    CHECK(r.best[0] <= 0.6);
    CHECK(r.best[0] == doctest::Approx(0.4).epsilon(0.05));  // pushes to the near edge
  }
}

TEST_CASE("every evaluated chromosome stays inside the box") {
  Bounds bounds;
  bounds.genes = {{0.2, 0.5}, {0.6, 0.9}, {0.0, 0.1}};
  const auto error_fn = [&bounds](const std::vector<double>& x) {
    double e = 0.0;
    for (std::size_t g = 0; g < x.size(); ++g) {
      REQUIRE(x[g] >= bounds.genes[g].first);
      REQUIRE(x[g] <= bounds.genes[g].second);
      e += x[g] * x[g];
    }
    return e;
  };
  GaConfig cfg = defaults_with_seed(5);
  cfg.crossover_rate = 1.0;
  cfg.mutation_rate = 0.5;
  ga_run(error_fn, bounds, cfg);
}

TEST_CASE("degenerate run returns the better of the evaluated individuals") {
  GaConfig cfg = defaults_with_seed(3);
  cfg.population = 2;
  cfg.generations = 1;
  const GaResult r = ga_run(quadratic, Bounds::full(1), cfg);
  REQUIRE(r.best_curve.size() == 2);
  CHECK(r.best_error <= r.best_curve[0]);
  CHECK(r.best_error == r.best_curve[1]);
  CHECK(r.best[0] >= 0.0);
  CHECK(r.best[0] <= 1.0);
}

TEST_CASE("elitism keeps the best-error curve non-increasing") {
  GaConfig cfg = defaults_with_seed(7);
  cfg.generations = 30;
  const auto rugged = [](const std::vector<double>& x) {
    return std::sin(20.0 * x[0]) + x[0] * x[0] + 1.5;
  };
  const GaResult r = ga_run(rugged, Bounds::full(1), cfg);
  REQUIRE(r.best_curve.size() == 31);
  for (std::size_t i = 1; i < r.best_curve.size(); ++i)
    CHECK(r.best_curve[i] <= r.best_curve[i - 1]);
  CHECK(r.best_error == r.best_curve.back());
}

TEST_CASE("identical seeds give identical results") {
  GaConfig cfg = defaults_with_seed(11);
  Bounds bounds = Bounds::full(3);
  const auto error_fn = [](const std::vector<double>& x) {
    return (x[0] - 0.2) * (x[0] - 0.2) + (x[1] - 0.5) * (x[1] - 0.5) +
           (x[2] - 0.9) * (x[2] - 0.9);
  };
  const GaResult a = ga_run(error_fn, bounds, cfg);
  const GaResult b = ga_run(error_fn, bounds, cfg);
  CHECK(a.best == b.best);
  CHECK(a.best_error == b.best_error);
  CHECK(a.best_curve == b.best_curve);
}

TEST_CASE("tightened bounds around the optimum do not hurt") {
  Bounds wide = Bounds::full(1);
  Bounds tight;
  tight.genes = {{0.25, 0.35}};
  double wide_total = 0.0, tight_total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    wide_total += std::abs(ga_run(quadratic, wide, defaults_with_seed(seed)).best[0] - 0.3);
    tight_total += std::abs(ga_run(quadratic, tight, defaults_with_seed(seed)).best[0] - 0.3);
  }
  CHECK(tight_total < wide_total);
}

TEST_CASE("a non-finite error aborts with the offending chromosome") {
  const auto bad = [](const std::vector<double>& x) {
    return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
  };
  CHECK_THROWS_AS(ga_run(bad, Bounds::full(1), defaults_with_seed(1)), NumericError);
}

TEST_CASE("config validation") {
  GaConfig cfg = defaults_with_seed(1);
  cfg.population = 1;
  CHECK_THROWS_AS(ga_run(quadratic, Bounds::full(1), cfg), InputError);
  cfg = defaults_with_seed(1);
  cfg.generations = 0;
  CHECK_THROWS_AS(ga_run(quadratic, Bounds::full(1), cfg), InputError);
  Bounds bad;
  bad.genes = {{0.5, 0.5}};
  CHECK_THROWS_AS(ga_run(quadratic, bad, defaults_with_seed(1)), InputError);
  bad.genes = {{-0.1, 0.5}};
  CHECK_THROWS_AS(ga_run(quadratic, bad, defaults_with_seed(1)), InputError);
}
