#ifndef IMPUTE_EVAL_HPP
#define IMPUTE_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impute/dataset.hpp"
#include "impute/imputer.hpp"

namespace impute {

/// Per-attribute accuracy tiers in raw units, strictly increasing. Binary
/// attributes are scored with specificity/sensitivity instead.
struct ToleranceScheme {
  std::map<std::string, std::vector<double>> continuous;

  const std::vector<double>& tiers_for(const std::string& attribute) const;

  /// Survey-style defaults: age-like attributes 2/4/6/10, schooling 1/2/3/5,
  /// pregnancy counts exact/1/3/5; anything else gets fractions of its range.
  static ToleranceScheme defaults_for(const Schema& schema);
};

/// Share of |imputed - true| <= tolerance, as a percentage. Inputs are raw
/// (de-normalized) units; the boundary counts as a hit.
double accuracy_within(const std::vector<double>& truth, const std::vector<double>& imputed,
                       double tolerance);

struct BinaryScore {
  std::optional<double> specificity;  // absent when there are no actual negatives
  std::optional<double> sensitivity;  // absent when there are no actual positives
  double accuracy = 0.0;
  long long tn = 0, fp = 0, tp = 0, fn = 0;
};

/// Expects inputs already thresholded to {0,1}.
BinaryScore specificity(const std::vector<double>& truth, const std::vector<double>& imputed);

struct AttributeScore {
  std::vector<double> accuracy;  // per tier, continuous only
  BinaryScore binary;            // binary only
  long long holes = 0;
};

struct PipelineScores {
  std::string name;
  std::map<std::string, AttributeScore> attributes;
  /// Mean over planned attributes of the tier-2 accuracy (specificity for
  /// binary attributes); absent when nothing was scored.
  std::optional<double> mean_tier2;
};

struct SeedScores {
  std::uint64_t seed = 0;
  std::vector<PipelineScores> pipelines;
};

struct PipelineSpec {
  PipelineVariant variant = PipelineVariant::aann;
  BoundsMode mode = BoundsMode::full_range;

  std::string display_name() const;
};

struct MaskPlanEntry {
  std::string attribute;
  double fraction = 0.1;
};

struct BenchmarkInputs {
  SplitSpec split;
  std::vector<PipelineSpec> pipelines;
  std::vector<MaskPlanEntry> plan;
  std::vector<std::uint64_t> seeds;
  PipelineConfig pipeline_cfg;
  GaConfig ga_cfg;
  ToleranceScheme tolerances;
  bool include_baseline = true;
};

struct BenchmarkReport {
  std::vector<SeedScores> per_seed;
  std::vector<PipelineScores> averaged;  // arithmetic mean of per-seed cells
  ToleranceScheme tolerances;
};

/// For every seed: split, train each pipeline on the identical splits, mask
/// the planned attributes on the test split, impute, and score against the
/// retained ground truth. The mean-imputation baseline is appended last.
BenchmarkReport benchmark(const Dataset& data, const BenchmarkInputs& inputs);

/// Aligned plain-text tables, one section per pipeline. Throws NumericError
/// if any accuracy row decreases with the tolerance tier.
std::string render_report_text(const BenchmarkReport& report);
std::string render_report_csv(const BenchmarkReport& report);
std::string render_seed_csv(const SeedScores& seed_scores, const ToleranceScheme& tolerances);

}  // namespace impute

#endif
