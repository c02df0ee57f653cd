#ifndef IMPUTE_CLI_HPP
#define IMPUTE_CLI_HPP

#include <filesystem>

#include "impute/config.hpp"

namespace impute::cli {

/// Writes net/pca/tree files plus a manifest and the schema into out_dir.
void save_pipeline(const PipelineModel& model, BoundsMode mode,
                   const std::filesystem::path& dir);

struct LoadedPipeline {
  PipelineModel model;
  BoundsMode mode = BoundsMode::full_range;
};
LoadedPipeline load_pipeline(const std::filesystem::path& dir);

/// train: fit the configured pipeline on the complete rows of the data file
/// and serialize it (with its training report) into the output directory.
void cmd_train(const RunConfig& cfg);

/// impute: fill every hole in the input CSV using a trained model directory;
/// writes the completed CSV and a per-hole diagnostics CSV.
void cmd_impute(const RunConfig& cfg);

/// benchmark: mask, impute and score the configured pipelines over the
/// configured seeds; writes the averaged report and per-seed dumps.
void cmd_benchmark(const RunConfig& cfg);

/// sweep: hidden-node RMSE table, training-cycle curves and the per-K PCA
/// reconstruction table for the loaded data.
void cmd_sweep(const RunConfig& cfg);

}  // namespace impute::cli

#endif
