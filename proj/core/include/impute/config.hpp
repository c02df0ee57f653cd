#ifndef IMPUTE_CONFIG_HPP
#define IMPUTE_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "impute/eval.hpp"
#include "impute/imputer.hpp"

namespace impute {

/// Everything a command needs; populated from the sectioned key-value config
/// file, then overridden by CLI flags. The default seed is a constant so a
/// run with no arguments is reproducible.
struct RunConfig {
  std::filesystem::path schema_path;
  std::filesystem::path data_path;
  std::filesystem::path out_dir = "out";
  std::filesystem::path model_dir;   // impute: directory written by train
  std::filesystem::path input_path;  // impute: CSV with holes
  bool strict_load = true;

  PipelineVariant pipeline = PipelineVariant::aann;
  BoundsMode bounds = BoundsMode::tree_interval;
  std::uint64_t seed = 42;

  SplitSpec split;
  PipelineConfig pipeline_cfg;
  GaConfig ga;

  std::map<std::string, std::vector<double>> tolerance_overrides;

  // benchmark
  std::vector<PipelineSpec> bench_pipelines;   // empty: all four variants
  std::vector<std::string> plan_attributes;    // empty: every continuous + binary
  double mask_fraction = 0.1;
  std::vector<std::uint64_t> bench_seeds = {1, 2, 3};

  // sweep
  std::vector<int> sweep_hidden;  // empty: kind-dependent default range
  int sweep_cycles = 60;
};

/// Parses "[section]" headers and "key = value" lines; '#' starts a comment.
/// Unknown sections or keys are errors. Relative schema/data paths resolve
/// against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);

PipelineVariant parse_pipeline_name(const std::string& name);
BoundsMode parse_bounds_name(const std::string& name);

/// Tolerance scheme for a schema: defaults plus any config overrides.
ToleranceScheme resolve_tolerances(const Schema& schema, const RunConfig& cfg);

}  // namespace impute

#endif
