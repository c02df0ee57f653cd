#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "impute/cli.hpp"
#include "impute/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::string schema;
  std::string data;
  std::string pipeline;
  std::string bounds;
  std::string out;
  std::string model;
  std::string input;
  long long seed = -1;
};

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "sectioned key-value config file");
  cmd->add_option("--schema", flags.schema, "schema file");
  cmd->add_option("--data", flags.data, "CSV data file");
  cmd->add_option("--pipeline", flags.pipeline, "aann or pca-nn");
  cmd->add_option("--bounds", flags.bounds, "full or tree");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--out", flags.out, "output directory");
}

impute::RunConfig resolve(const Flags& flags) {
  impute::RunConfig cfg;
  if (!flags.config.empty()) cfg = impute::load_run_config(flags.config);
  if (!flags.schema.empty()) cfg.schema_path = flags.schema;
  if (!flags.data.empty()) cfg.data_path = flags.data;
  if (!flags.pipeline.empty()) cfg.pipeline = impute::parse_pipeline_name(flags.pipeline);
  if (!flags.bounds.empty()) cfg.bounds = impute::parse_bounds_name(flags.bounds);
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (!flags.model.empty()) cfg.model_dir = flags.model;
  if (!flags.input.empty()) cfg.input_path = flags.input;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  return cfg;
}

void require(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) throw impute::InputError("missing " + what);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missing-data imputation: data model + decision-tree bounds + GA search"};
  app.require_subcommand(1);

  Flags flags;
  auto* train = app.add_subcommand("train", "train a pipeline and serialize it");
  add_common(train, flags);
  auto* do_impute = app.add_subcommand("impute", "fill holes in a CSV with a trained model");
  add_common(do_impute, flags);
  do_impute->add_option("--model", flags.model, "model directory from train");
  do_impute->add_option("--input", flags.input, "CSV with empty cells to fill");
  auto* bench = app.add_subcommand("benchmark", "mask, impute and score pipelines");
  add_common(bench, flags);
  auto* sweep = app.add_subcommand("sweep", "hidden-node, cycle and PCA dimension tables");
  add_common(sweep, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    impute::RunConfig cfg = resolve(flags);
    if (train->parsed()) {
      require(cfg.schema_path, "--schema (or [data] schema in the config)");
      require(cfg.data_path, "--data (or [data] data in the config)");
      impute::cli::cmd_train(cfg);
    } else if (do_impute->parsed()) {
      require(cfg.model_dir, "--model");
      require(cfg.input_path, "--input");
      impute::cli::cmd_impute(cfg);
    } else if (bench->parsed()) {
      require(cfg.schema_path, "--schema (or [data] schema in the config)");
      require(cfg.data_path, "--data (or [data] data in the config)");
      impute::cli::cmd_benchmark(cfg);
    } else if (sweep->parsed()) {
      require(cfg.schema_path, "--schema (or [data] schema in the config)");
      require(cfg.data_path, "--data (or [data] data in the config)");
      impute::cli::cmd_sweep(cfg);
    }
  } catch (const impute::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const impute::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
