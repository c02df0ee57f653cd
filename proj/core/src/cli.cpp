#include "impute/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "impute/errors.hpp"

namespace impute::cli {

namespace {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("IMPUTE_LOG");
    if (!env) return LogLevel::info;
    const std::string v(env);
    if (v == "error") return LogLevel::error;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::cerr << "[info] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::cerr << "[debug] " << msg << '\n';
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string fmtg(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

/// Cell text for an imputed raw attribute value.
std::string format_cell(const AttributeSpec& spec, double raw) {
  switch (spec.kind) {
    case AttributeKind::binary:
      return raw >= 0.5 ? "1" : "0";
    case AttributeKind::categorical:
      return spec.levels[static_cast<std::size_t>(raw)];
    case AttributeKind::continuous: {
      std::ostringstream out;
      out.precision(6);
      out << raw;
      return out.str();
    }
  }
  return "";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string train_report_text(const TrainReport& report) {
  std::ostringstream out;
  out << "cycle train_rmse validation_rmse\n";
  for (std::size_t i = 0; i < report.train_rmse.size(); ++i)
    out << (i + 1) << ' ' << fmtg(report.train_rmse[i]) << ' '
        << fmtg(report.validation_rmse[i]) << '\n';
  out << "stopped_at " << report.stopped_at << '\n';
  out << "best_validation " << fmtg(report.best_validation) << '\n';
  return out.str();
}

/// Complete rows only; logs how many were dropped.
Dataset complete_rows(const Dataset& d) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < d.record_count(); ++r)
    if (d.row_complete(r)) keep.push_back(r);
  if (keep.empty()) throw InputError("no complete rows in the data file");
  if (static_cast<Eigen::Index>(keep.size()) == d.record_count()) return d;
  log_info("dropped " + std::to_string(d.record_count() - static_cast<Eigen::Index>(keep.size())) +
           " rows with holes; " + std::to_string(keep.size()) + " complete rows remain");
  Dataset out;
  out.schema = d.schema;
  out.provenance = d.provenance;
  out.rows.resize(static_cast<Eigen::Index>(keep.size()), d.schema.total_width);
  out.mask.resize(static_cast<Eigen::Index>(keep.size()), d.schema.total_width);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) = d.rows.row(keep[i]);
    out.mask.row(static_cast<Eigen::Index>(i)) = d.mask.row(keep[i]);
  }
  return out;
}

Dataset load_normalized(const RunConfig& cfg, const Schema& schema) {
  LoadStats stats;
  Dataset raw = load_csv(cfg.data_path, schema, cfg.strict_load, &stats);
  if (stats.clamped > 0)
    log_info(std::to_string(stats.clamped) + " out-of-range cells clamped");
  return encode_normalize(raw);
}

std::vector<PipelineSpec> default_bench_pipelines() {
  return {
      {PipelineVariant::aann, BoundsMode::full_range},
      {PipelineVariant::aann, BoundsMode::tree_interval},
      {PipelineVariant::pca_nn, BoundsMode::full_range},
      {PipelineVariant::pca_nn, BoundsMode::tree_interval},
  };
}

}  // namespace

void save_pipeline(const PipelineModel& model, BoundsMode mode,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "pipeline 1\n";
  manifest << "variant " << (model.variant == PipelineVariant::aann ? "aann" : "pca-nn") << '\n';
  manifest << "bounds " << (mode == BoundsMode::tree_interval ? "tree" : "full") << '\n';
  manifest << "net net.txt\n";
  if (model.variant == PipelineVariant::pca_nn) manifest << "pca pca.txt\n";
  for (const auto& [attr, tree] : model.trees)
    manifest << "tree " << attr << " tree_" << attr << ".txt\n";

  write_file(dir / "schema.txt", model.schema.to_text());
  write_file(dir / "pipeline.txt", manifest.str());
  save_mlp(model.net, dir / "net.txt");
  if (model.variant == PipelineVariant::pca_nn) save_pca(model.pca, dir / "pca.txt");
  for (const auto& [attr, tree] : model.trees)
    save_tree(tree, model.schema, dir / ("tree_" + attr + ".txt"));
}

LoadedPipeline load_pipeline(const std::filesystem::path& dir) {
  LoadedPipeline loaded;
  loaded.model.schema = Schema::load(dir / "schema.txt");

  std::istringstream manifest(read_file(dir / "pipeline.txt"));
  std::string line;
  if (!std::getline(manifest, line) || line != "pipeline 1")
    throw InputError("pipeline manifest: bad magic line");
  while (std::getline(manifest, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string key;
    s >> key;
    if (key == "variant") {
      std::string v;
      s >> v;
      loaded.model.variant = parse_pipeline_name(v);
    } else if (key == "bounds") {
      std::string v;
      s >> v;
      loaded.mode = parse_bounds_name(v);
    } else if (key == "net") {
      std::string file;
      s >> file;
      loaded.model.net = load_mlp(dir / file);
    } else if (key == "pca") {
      std::string file;
      s >> file;
      loaded.model.pca = load_pca(dir / file);
    } else if (key == "tree") {
      std::string attr, file;
      s >> attr >> file;
      loaded.model.trees.emplace(attr, load_tree(dir / file, loaded.model.schema));
    } else {
      throw InputError("pipeline manifest: unknown key '" + key + "'");
    }
  }
  if (loaded.model.net.input != loaded.model.schema.total_width)
    throw InputError("pipeline manifest: net input does not match schema width");
  return loaded;
}

void cmd_train(const RunConfig& cfg) {
  const Schema schema = Schema::load(cfg.schema_path);
  Dataset data = complete_rows(load_normalized(cfg, schema));

  SplitSpec ss = cfg.split;
  ss.seed = cfg.seed;
  const SplitResult parts = split(data, ss);
  log_info("split " + std::to_string(parts.train.record_count()) + "/" +
           std::to_string(parts.validation.record_count()) + "/" +
           std::to_string(parts.test.record_count()) + " train/validation/test");

  PipelineConfig pc = cfg.pipeline_cfg;
  pc.seed = cfg.seed;
  const PipelineModel model =
      train_pipeline(cfg.pipeline, parts.train, parts.validation, cfg.bounds, pc);

  save_pipeline(model, cfg.bounds, cfg.out_dir);
  write_file(cfg.out_dir / "train_report.txt", train_report_text(model.report));
  log_info("trained " + std::string(cfg.pipeline == PipelineVariant::aann ? "aann" : "pca-nn") +
           " (" + std::to_string(model.net.input) + "-" + std::to_string(model.net.hidden) +
           "-" + std::to_string(model.net.output) + "), best validation RMSE " +
           fmtg(model.report.best_validation));
  std::cout << "model written to " << cfg.out_dir.string() << '\n';
}

void cmd_impute(const RunConfig& cfg) {
  LoadedPipeline loaded = load_pipeline(cfg.model_dir);
  const Schema& schema = loaded.model.schema;

  // original cell text is preserved for present cells
  const std::string text = read_file(cfg.input_path);
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> cells;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> row;
    for (auto& tok : split_fields(line, ',')) row.push_back(trim(tok));
    cells.push_back(std::move(row));
  }
  if (cells.size() < 2) throw InputError(cfg.input_path.string() + ": no data rows");

  LoadStats stats;
  Dataset raw = load_csv(cfg.input_path, schema, cfg.strict_load, &stats);
  Dataset data = encode_normalize(raw);

  std::ostringstream diag;
  diag << "row,attribute,column,lo,hi,error\n";

  std::size_t filled = 0;
  for (Eigen::Index r = 0; r < data.record_count(); ++r) {
    if (data.row_complete(r)) continue;
    const RecordHole hole = hole_for_row(data, r);
    GaConfig gc = cfg.ga;
    gc.seed = Rng::stream(cfg.seed, "ga", static_cast<std::uint64_t>(r)).next_u64();
    const ImputedRecord rec = impute_record(loaded.model, hole, loaded.mode, gc);

    std::size_t gene = 0;
    for (int attr : hole.missing_attrs) {
      const auto& spec = schema.attributes[attr];
      cells[static_cast<std::size_t>(r) + 1][static_cast<std::size_t>(attr)] =
          format_cell(spec, rec.raw[static_cast<std::size_t>(attr)]);
      for (int j = 0; j < spec.encoded_width; ++j, ++gene) {
        diag << r << ',' << spec.name << ',' << j << ','
             << fmtg(rec.bounds.genes[gene].first) << ','
             << fmtg(rec.bounds.genes[gene].second) << ',' << fmtg(rec.final_error) << '\n';
      }
      ++filled;
    }
  }

  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  }
  write_file(cfg.out_dir / "imputed.csv", out.str());
  write_file(cfg.out_dir / "diagnostics.csv", diag.str());
  log_info("filled " + std::to_string(filled) + " holes");
  std::cout << "imputed CSV written to " << (cfg.out_dir / "imputed.csv").string() << '\n';
}

void cmd_benchmark(const RunConfig& cfg) {
  const Schema schema = Schema::load(cfg.schema_path);
  Dataset data = load_normalized(cfg, schema);
  if (!data.complete())
    throw InputError("benchmark needs a complete dataset; the input has holes");

  BenchmarkInputs inputs;
  inputs.split = cfg.split;
  inputs.pipelines =
      cfg.bench_pipelines.empty() ? default_bench_pipelines() : cfg.bench_pipelines;
  inputs.seeds = cfg.bench_seeds;
  inputs.pipeline_cfg = cfg.pipeline_cfg;
  inputs.ga_cfg = cfg.ga;
  inputs.tolerances = resolve_tolerances(schema, cfg);

  if (cfg.plan_attributes.empty()) {
    for (const auto& spec : schema.attributes)
      if (spec.kind != AttributeKind::categorical)
        inputs.plan.push_back({spec.name, cfg.mask_fraction});
  } else {
    for (const auto& name : cfg.plan_attributes)
      inputs.plan.push_back({name, cfg.mask_fraction});
  }

  log_debug("benchmarking " + std::to_string(inputs.pipelines.size()) + " pipelines over " +
            std::to_string(inputs.seeds.size()) + " seeds");
  const BenchmarkReport report = benchmark(data, inputs);

  std::filesystem::create_directories(cfg.out_dir);
  write_file(cfg.out_dir / "report.txt", render_report_text(report));
  write_file(cfg.out_dir / "report.csv", render_report_csv(report));
  for (const auto& seed_scores : report.per_seed)
    write_file(cfg.out_dir / ("seed_" + std::to_string(seed_scores.seed) + ".csv"),
               render_seed_csv(seed_scores, report.tolerances));
  std::cout << render_report_text(report);
}

void cmd_sweep(const RunConfig& cfg) {
  const Schema schema = Schema::load(cfg.schema_path);
  Dataset data = complete_rows(load_normalized(cfg, schema));

  SplitSpec ss = cfg.split;
  ss.seed = cfg.seed;
  const SplitResult parts = split(data, ss);
  const int n = schema.total_width;

  std::filesystem::create_directories(cfg.out_dir);

  // PCA reconstruction per K, on train+validation as the models see it
  Eigen::MatrixXd combined(parts.train.rows.rows() + parts.validation.rows.rows(), n);
  combined << parts.train.rows, parts.validation.rows;
  const DimensionSweep pca_sweep = choose_dimension(combined, cfg.pipeline_cfg.pca_tolerance);
  {
    std::ostringstream out;
    out << "k reconstruction_rmse\n";
    for (std::size_t k = 0; k < pca_sweep.rmse_by_k.size(); ++k)
      out << (k + 1) << ' ' << fmtg(pca_sweep.rmse_by_k[k]) << '\n';
    out << "chosen " << pca_sweep.chosen << '\n';
    write_file(cfg.out_dir / "pca_sweep.txt", out.str());
  }

  // hidden-node sweep for the configured pipeline
  std::vector<int> candidates = cfg.sweep_hidden;
  if (candidates.empty()) {
    const int hi = cfg.pipeline == PipelineVariant::aann ? n - 1 : n + 8;
    for (int h = 2; h <= hi; ++h) candidates.push_back(h);
  }
  if (candidates.empty()) throw InputError("sweep: no hidden-node candidates");

  SweepResult hidden_sweep;
  if (cfg.pipeline == PipelineVariant::aann) {
    for (int h : candidates)
      if (h >= n)
        throw InputError("sweep: autoencoder hidden nodes must stay below the input size (" +
                         std::to_string(h) + " >= " + std::to_string(n) + ")");
    hidden_sweep = sweep_hidden_nodes(parts.train.rows, parts.train.rows,
                                      parts.validation.rows, parts.validation.rows,
                                      candidates, cfg.sweep_cycles, cfg.seed,
                                      OutputActivation::sigmoid);
  } else {
    const int k = cfg.pipeline_cfg.pca_dimension > 0 ? cfg.pipeline_cfg.pca_dimension
                                                     : pca_sweep.chosen;
    const PcaModel pca = fit_pca(combined, k);
    const Eigen::MatrixXd train_y = project_batch(pca, parts.train.rows);
    const Eigen::MatrixXd val_y = project_batch(pca, parts.validation.rows);
    hidden_sweep = sweep_hidden_nodes(parts.train.rows, train_y, parts.validation.rows,
                                      val_y, candidates, cfg.sweep_cycles, cfg.seed,
                                      OutputActivation::linear);
  }
  {
    std::ostringstream out;
    out << "hidden train_rmse\n";
    for (const auto& row : hidden_sweep.rows)
      out << row.hidden << ' ' << fmtg(row.train_rmse) << '\n';
    out << "chosen " << hidden_sweep.chosen_hidden << '\n';
    write_file(cfg.out_dir / "hidden_sweep.txt", out.str());
  }

  // training curves at the chosen width
  {
    PipelineConfig pc = cfg.pipeline_cfg;
    pc.seed = cfg.seed;
    pc.hidden_nodes = hidden_sweep.chosen_hidden;
    if (cfg.pipeline == PipelineVariant::pca_nn && pc.pca_dimension <= 0)
      pc.pca_dimension = pca_sweep.chosen;
    const PipelineModel model = train_pipeline(cfg.pipeline, parts.train, parts.validation,
                                               BoundsMode::full_range, pc);
    write_file(cfg.out_dir / "cycle_curves.txt", train_report_text(model.report));
  }

  std::cout << "chosen hidden nodes: " << hidden_sweep.chosen_hidden
            << ", chosen pca dimension: " << pca_sweep.chosen << '\n';
}

}  // namespace impute::cli
