#ifndef IMPUTE_IMPUTER_HPP
#define IMPUTE_IMPUTER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impute/dataset.hpp"
#include "impute/ga.hpp"
#include "impute/mlp.hpp"
#include "impute/pca.hpp"
#include "impute/tree.hpp"

namespace impute {

enum class PipelineVariant { aann, pca_nn };
enum class BoundsMode { full_range, tree_interval };

/// One record's missingness: which attributes (and therefore which encoded
/// columns) need values, plus the known columns.
struct RecordHole {
  Eigen::Index row = 0;
  std::vector<int> missing_attrs;  // schema attribute indices
  std::vector<int> missing_cols;   // encoded column indices, ascending
  Eigen::VectorXd known;           // full-width vector, missing columns zeroed
};

RecordHole hole_for_row(const Dataset& d, Eigen::Index row);

/// A trained data model: either an autoencoder or a PCA map with a
/// regression network approximating it, plus optional per-attribute trees
/// that bound the search.
struct PipelineModel {
  PipelineVariant variant = PipelineVariant::aann;
  Schema schema;
  MlpModel net;  // autoencoder (N->N) or PCA regressor (N->K)
  PcaModel pca;  // pca_nn only
  std::map<std::string, DecisionTree> trees;
  TrainReport report;
};

struct PipelineConfig {
  int hidden_nodes = 0;        // 0: input-2 for aann, input+4 for pca_nn
  int cycles = 0;              // 0: 110 for aann, 140 for pca_nn
  int patience = 20;
  int pca_dimension = 0;       // 0: pick via choose_dimension
  double pca_tolerance = 0.01;
  TreeParams tree;
  std::map<std::string, double> interval_widths;  // raw units per attribute
  std::uint64_t seed = 0;
};

/// Default interval width for a continuous attribute: a named override, or
/// an eighth of the attribute range.
double interval_width_for(const AttributeSpec& spec,
                          const std::map<std::string, double>& overrides);

/// Trains the data model on the complete train/validation splits; when mode
/// is tree_interval, also induces one tree per continuous and binary
/// attribute. The PCA map is fit on train+validation combined.
PipelineModel train_pipeline(PipelineVariant variant, const Dataset& train,
                             const Dataset& validation, BoundsMode mode,
                             const PipelineConfig& cfg);

/// Reconstruction error of the assembled record through the autoencoder:
/// squared distance between the vector and its forward image over all
/// components.
double error_aann(const PipelineModel& model, const RecordHole& hole,
                  const std::vector<double>& candidate);

/// Squared distance between the PCA projection and the regression network's
/// output for the assembled record.
double error_pcann(const PipelineModel& model, const RecordHole& hole,
                   const std::vector<double>& candidate);

/// GA search box for a hole. full_range gives [0,1] everywhere. tree_interval
/// converts the tree-predicted interval to normalized units, maps a binary
/// prediction to its half range, and leaves untree'd categorical bits at
/// [0,1] (or half ranges per predicted-level bit when a tree exists).
Bounds bounds_for(const RecordHole& hole, BoundsMode mode, const PipelineModel& model);

struct ImputedRecord {
  Eigen::VectorXd row;            // completed normalized row
  std::vector<double> raw;        // decoded attribute values
  double final_error = 0.0;       // 0 when nothing was missing
  Bounds bounds;                  // box handed to the GA (empty when no holes)
};

/// Fills a record's missing columns by GA-minimizing the variant's error
/// function inside bounds_for. Records without holes pass through untouched.
ImputedRecord impute_record(const PipelineModel& model, const RecordHole& hole,
                            BoundsMode mode, const GaConfig& ga_cfg);

/// Completes every hole of one attribute with the column mean over observed
/// rows (normalized space).
Dataset impute_baseline_mean(const Dataset& d, const std::string& attribute);

}  // namespace impute

#endif
