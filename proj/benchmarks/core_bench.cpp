#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "impute/dataset.hpp"
#include "impute/ga.hpp"
#include "impute/imputer.hpp"
#include "impute/mlp.hpp"
#include "impute/pca.hpp"
#include "impute/rng.hpp"
#include "impute/tree.hpp"

using namespace impute;

namespace {

Schema bench_schema(int continuous) {
  std::vector<AttributeSpec> attrs;
  for (int i = 0; i < continuous; ++i)
    attrs.push_back(continuous_attribute("v" + std::to_string(i), 0.0, 100.0));
  attrs.push_back(binary_attribute("flag"));
  return Schema::make(attrs);
}

Dataset bench_dataset(const Schema& schema, Eigen::Index rows, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.schema = schema;
  d.provenance = Provenance::normalized;
  d.rows.resize(rows, schema.total_width);
  d.mask.setConstant(rows, schema.total_width, true);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double f = rng.normal();
    for (int c = 0; c + 1 < schema.total_width; ++c)
      d.rows(r, c) = std::clamp(0.5 + 0.15 * f + 0.1 * rng.normal(), 0.0, 1.0);
    d.rows(r, schema.total_width - 1) = f > 0 ? 1.0 : 0.0;
  }
  return d;
}

}  // namespace

static void BM_Entropy(benchmark::State& state) {
  ClassCounts counts;
  counts.counts = {120, 75, 31, 9};
  counts.total = 235;
  for (auto _ : state) benchmark::DoNotOptimize(entropy(counts));
}
BENCHMARK(BM_Entropy);

static void BM_TreeInduction(benchmark::State& state) {
  const Schema schema = bench_schema(6);
  const Dataset data = bench_dataset(schema, state.range(0), 1);
  const auto& spec = schema.attributes[0];
  TreeParams params;
  for (auto _ : state) {
    auto tree = induce(data, "v0", IntervalScheme::bins(spec, spec.range() / 8.0), params);
    benchmark::DoNotOptimize(tree);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeInduction)->Range(256, 4096)->Complexity();

static void BM_MlpForward(benchmark::State& state) {
  const MlpModel m = init_mlp(13, 11, 13, 7);
  Rng rng(3);
  Eigen::VectorXd x(13);
  for (int i = 0; i < 13; ++i) x(i) = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
}
BENCHMARK(BM_MlpForward);

static void BM_MlpGradient(benchmark::State& state) {
  const MlpModel m = init_mlp(13, 11, 13, 7);
  Rng rng(4);
  Eigen::MatrixXd batch(state.range(0), 13);
  for (Eigen::Index r = 0; r < batch.rows(); ++r)
    for (int c = 0; c < 13; ++c) batch(r, c) = rng.uniform();
  MlpGradient grad;
  for (auto _ : state)
    benchmark::DoNotOptimize(loss_and_gradient(m, batch, batch, grad));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MlpGradient)->Range(64, 4096)->Complexity();

static void BM_PcaFit(benchmark::State& state) {
  Rng rng(5);
  Eigen::MatrixXd data(state.range(0), 13);
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (int c = 0; c < 13; ++c) data(r, c) = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(data, 7));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PcaFit)->Range(256, 4096)->Complexity();

static void BM_GaQuadratic(benchmark::State& state) {
  const auto error_fn = [](const std::vector<double>& x) {
    double e = 0.0;
    for (double v : x) e += (v - 0.3) * (v - 0.3);
    return e;
  };
  const Bounds bounds = Bounds::full(static_cast<std::size_t>(state.range(0)));
  GaConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(ga_run(error_fn, bounds, cfg));
}
BENCHMARK(BM_GaQuadratic)->Arg(1)->Arg(2)->Arg(4);

static void BM_ImputeRecord(benchmark::State& state) {
  const Schema schema = bench_schema(6);
  const Dataset data = bench_dataset(schema, 300, 2);
  SplitSpec ss;
  const SplitResult parts = split(data, ss);
  PipelineConfig pc;
  pc.cycles = 40;
  const PipelineModel model = train_pipeline(PipelineVariant::aann, parts.train,
                                             parts.validation, BoundsMode::full_range, pc);
  Dataset masked = inject_mcar(parts.test, "v1", 0.5, 3);
  std::vector<RecordHole> holes;
  for (Eigen::Index r = 0; r < masked.record_count(); ++r)
    if (!masked.row_complete(r)) holes.push_back(hole_for_row(masked, r));
  GaConfig ga;
  std::size_t at = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        impute_record(model, holes[at % holes.size()], BoundsMode::full_range, ga));
    ++at;
  }
}
BENCHMARK(BM_ImputeRecord);

BENCHMARK_MAIN();
