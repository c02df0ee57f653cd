#include "impute/imputer.hpp"

#include <algorithm>
#include <cmath>

#include "impute/errors.hpp"

namespace impute {

RecordHole hole_for_row(const Dataset& d, Eigen::Index row) {
  RecordHole hole;
  hole.row = row;
  hole.known = d.rows.row(row).transpose();
  for (int a = 0; a < d.schema.attribute_count(); ++a) {
    if (d.attribute_present(row, a)) continue;
    hole.missing_attrs.push_back(a);
    const int off = d.schema.offsets[a];
    for (int j = 0; j < d.schema.attributes[a].encoded_width; ++j)
      hole.missing_cols.push_back(off + j);
  }
  for (int c : hole.missing_cols) hole.known(c) = 0.0;
  return hole;
}

namespace {

Eigen::VectorXd assemble(const RecordHole& hole, const std::vector<double>& candidate) {
  if (candidate.size() != hole.missing_cols.size())
    throw InputError("imputer: candidate has " + std::to_string(candidate.size()) +
                     " genes, hole needs " + std::to_string(hole.missing_cols.size()));
  Eigen::VectorXd x = hole.known;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (!std::isfinite(candidate[i]))
      throw NumericError("imputer: non-finite candidate value");
    x(hole.missing_cols[i]) = candidate[i];
  }
  return x;
}

/// Raw attribute values of the known part of a record, for tree descent.
std::vector<std::optional<double>> known_attribute_values(const RecordHole& hole,
                                                          const Schema& schema) {
  std::vector<std::optional<double>> vals(schema.attribute_count());
  for (int a = 0; a < schema.attribute_count(); ++a) {
    if (std::find(hole.missing_attrs.begin(), hole.missing_attrs.end(), a) !=
        hole.missing_attrs.end())
      continue;
    vals[a] = decode_attribute(hole.known, schema, a);
  }
  return vals;
}

}  // namespace

double interval_width_for(const AttributeSpec& spec,
                          const std::map<std::string, double>& overrides) {
  auto it = overrides.find(spec.name);
  if (it != overrides.end()) return it->second;
  return spec.range() / 8.0;
}

double error_aann(const PipelineModel& model, const RecordHole& hole,
                  const std::vector<double>& candidate) {
  const Eigen::VectorXd x = assemble(hole, candidate);
  return (x - forward(model.net, x)).squaredNorm();
}

double error_pcann(const PipelineModel& model, const RecordHole& hole,
                   const std::vector<double>& candidate) {
  const Eigen::VectorXd x = assemble(hole, candidate);
  return (project(model.pca, x) - forward(model.net, x)).squaredNorm();
}

Bounds bounds_for(const RecordHole& hole, BoundsMode mode, const PipelineModel& model) {
  Bounds bounds;
  if (mode == BoundsMode::full_range) {
    bounds = Bounds::full(hole.missing_cols.size());
    return bounds;
  }

  const Schema& schema = model.schema;
  const auto known = known_attribute_values(hole, schema);
  for (int attr : hole.missing_attrs) {
    const auto& spec = schema.attributes[attr];
    const auto tree_it = model.trees.find(spec.name);

    if (spec.kind == AttributeKind::categorical) {
      if (tree_it == model.trees.end()) {
        // no tree: each encoded bit searched over its full range
        for (int j = 0; j < spec.encoded_width; ++j) bounds.genes.emplace_back(0.0, 1.0);
      } else {
        const int level = predict_interval(tree_it->second, known);
        for (int j = 0; j < spec.encoded_width; ++j) {
          const int bit = (level >> (spec.encoded_width - 1 - j)) & 1;
          bounds.genes.emplace_back(bit ? 0.5 : 0.0, bit ? 1.0 : 0.5);
        }
      }
      continue;
    }

    if (tree_it == model.trees.end())
      throw InputError("bounds_for: no tree for attribute '" + spec.name +
                       "' in tree-interval mode");
    const int label = predict_interval(tree_it->second, known);

    if (spec.kind == AttributeKind::binary) {
      bounds.genes.emplace_back(label ? 0.5 : 0.0, label ? 1.0 : 0.5);
    } else {
      const auto [lo_raw, hi_raw] = tree_it->second.scheme.raw_interval(label);
      const double lo = (lo_raw - spec.min) / spec.range();
      const double hi = (hi_raw - spec.min) / spec.range();
      bounds.genes.emplace_back(std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0));
    }
  }
  return bounds;
}

PipelineModel train_pipeline(PipelineVariant variant, const Dataset& train,
                             const Dataset& validation, BoundsMode mode,
                             const PipelineConfig& cfg) {
  if (train.provenance != Provenance::normalized ||
      validation.provenance != Provenance::normalized)
    throw InputError("train_pipeline: datasets must be normalized");
  if (!train.complete() || !validation.complete())
    throw InputError("train_pipeline: training data must be complete");

  PipelineModel model;
  model.variant = variant;
  model.schema = train.schema;

  const int n = train.schema.total_width;
  TrainConfig tc;
  tc.early_stop_patience = cfg.patience;
  tc.seed = cfg.seed;

  if (variant == PipelineVariant::aann) {
    const int hidden = cfg.hidden_nodes > 0 ? cfg.hidden_nodes : std::max(1, n - 2);
    tc.max_cycles = cfg.cycles > 0 ? cfg.cycles : 110;
    MlpModel net = init_mlp(n, hidden, n, cfg.seed, OutputActivation::sigmoid);
    auto trained = train_scg(net, train.rows, train.rows, validation.rows,
                             validation.rows, tc);
    model.net = std::move(trained.model);
    model.report = std::move(trained.report);
  } else {
    // the PCA map sees train and validation together
    Eigen::MatrixXd combined(train.rows.rows() + validation.rows.rows(), n);
    combined << train.rows, validation.rows;
    int k = cfg.pca_dimension;
    if (k <= 0) k = choose_dimension(combined, cfg.pca_tolerance).chosen;
    model.pca = fit_pca(combined, k);

    const int hidden = cfg.hidden_nodes > 0 ? cfg.hidden_nodes : n + 4;
    tc.max_cycles = cfg.cycles > 0 ? cfg.cycles : 140;
    MlpModel net = init_mlp(n, hidden, k, cfg.seed, OutputActivation::linear);
    const Eigen::MatrixXd train_y = project_batch(model.pca, train.rows);
    const Eigen::MatrixXd val_y = project_batch(model.pca, validation.rows);
    auto trained = train_scg(net, train.rows, train_y, validation.rows, val_y, tc);
    model.net = std::move(trained.model);
    model.report = std::move(trained.report);
  }

  if (mode == BoundsMode::tree_interval) {
    for (const auto& spec : train.schema.attributes) {
      if (spec.kind == AttributeKind::categorical) continue;
      IntervalScheme scheme =
          spec.kind == AttributeKind::binary
              ? IntervalScheme::levels(spec)
              : IntervalScheme::bins(spec, interval_width_for(spec, cfg.interval_widths));
      model.trees.emplace(spec.name, induce(train, spec.name, std::move(scheme), cfg.tree));
    }
  }
  return model;
}

ImputedRecord impute_record(const PipelineModel& model, const RecordHole& hole,
                            BoundsMode mode, const GaConfig& ga_cfg) {
  ImputedRecord out;
  if (hole.missing_cols.empty()) {
    out.row = hole.known;
    out.raw = decode(out.row, model.schema);
    return out;
  }

  out.bounds = bounds_for(hole, mode, model);
  const auto error_fn = [&](const std::vector<double>& genes) {
    return model.variant == PipelineVariant::aann ? error_aann(model, hole, genes)
                                                  : error_pcann(model, hole, genes);
  };
  const GaResult ga = ga_run(error_fn, out.bounds, ga_cfg);

  out.row = hole.known;
  for (std::size_t i = 0; i < ga.best.size(); ++i)
    out.row(hole.missing_cols[i]) = ga.best[i];
  out.raw = decode(out.row, model.schema);
  out.final_error = ga.best_error;
  return out;
}

Dataset impute_baseline_mean(const Dataset& d, const std::string& attribute) {
  const int attr = d.schema.index_of(attribute);
  if (attr < 0) throw InputError("impute_baseline_mean: unknown attribute '" + attribute + "'");
  const int off = d.schema.offsets[attr];
  const int w = d.schema.attributes[attr].encoded_width;

  Dataset out = d;
  for (int j = 0; j < w; ++j) {
    double sum = 0.0;
    long long observed = 0;
    for (Eigen::Index r = 0; r < d.record_count(); ++r) {
      if (!d.mask(r, off + j)) continue;
      sum += d.rows(r, off + j);
      ++observed;
    }
    if (observed == 0)
      throw InputError("impute_baseline_mean: attribute '" + attribute +
                       "' has no observed values");
    const double mean = sum / static_cast<double>(observed);
    for (Eigen::Index r = 0; r < d.record_count(); ++r)
      if (!d.mask(r, off + j)) out.rows(r, off + j) = mean;
  }
  return out;
}

}  // namespace impute
