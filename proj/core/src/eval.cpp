#include "impute/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "impute/errors.hpp"

namespace impute {

namespace {

bool name_contains(const std::string& name, const std::string& needle) {
  std::string lower;
  lower.reserve(name.size());
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower.find(needle) != std::string::npos;
}

std::string fmt2(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

// full precision for CSVs so averages can be recomputed from per-seed dumps
std::string fmtg(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

const std::vector<double>& ToleranceScheme::tiers_for(const std::string& attribute) const {
  auto it = continuous.find(attribute);
  if (it == continuous.end())
    throw InputError("tolerances: no tiers for attribute '" + attribute + "'");
  return it->second;
}

ToleranceScheme ToleranceScheme::defaults_for(const Schema& schema) {
  ToleranceScheme scheme;
  for (const auto& spec : schema.attributes) {
    if (spec.kind != AttributeKind::continuous) continue;
    std::vector<double> tiers;
    if (name_contains(spec.name, "age")) {
      tiers = {2, 4, 6, 10};
    } else if (name_contains(spec.name, "edu")) {
      tiers = {1, 2, 3, 5};
    } else if (name_contains(spec.name, "gravid") || name_contains(spec.name, "parit")) {
      tiers = {0, 1, 3, 5};
    } else {
      const double r = spec.range();
      tiers = {0.025 * r, 0.05 * r, 0.10 * r, 0.20 * r};
    }
    scheme.continuous[spec.name] = std::move(tiers);
  }
  return scheme;
}

double accuracy_within(const std::vector<double>& truth, const std::vector<double>& imputed,
                       double tolerance) {
  if (truth.empty() || truth.size() != imputed.size())
    throw InputError("accuracy_within: inputs must be non-empty and equal length");
  long long hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (std::abs(imputed[i] - truth[i]) <= tolerance) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

BinaryScore specificity(const std::vector<double>& truth, const std::vector<double>& imputed) {
  if (truth.empty() || truth.size() != imputed.size())
    throw InputError("specificity: inputs must be non-empty and equal length");
  BinaryScore s;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] >= 0.5;
    const bool predicted = imputed[i] >= 0.5;
    if (actual && predicted) ++s.tp;
    else if (actual && !predicted) ++s.fn;
    else if (!actual && predicted) ++s.fp;
    else ++s.tn;
  }
  const long long negatives = s.tn + s.fp;
  const long long positives = s.tp + s.fn;
  if (negatives > 0)
    s.specificity = 100.0 * static_cast<double>(s.tn) / static_cast<double>(negatives);
  if (positives > 0)
    s.sensitivity = 100.0 * static_cast<double>(s.tp) / static_cast<double>(positives);
  s.accuracy = 100.0 * static_cast<double>(s.tn + s.tp) /
               static_cast<double>(truth.size());
  return s;
}

std::string PipelineSpec::display_name() const {
  const std::string base = variant == PipelineVariant::aann ? "AANN-GA" : "PCA-NN-GA";
  return mode == BoundsMode::tree_interval ? "C4.5+" + base : base;
}

namespace {

struct Collected {
  std::map<std::string, std::vector<double>> truth;
  std::map<std::string, std::vector<double>> imputed;
};

PipelineScores score_collected(const std::string& name, const Collected& c,
                               const Schema& schema, const std::vector<MaskPlanEntry>& plan,
                               const ToleranceScheme& tolerances) {
  PipelineScores scores;
  scores.name = name;
  double tier2_sum = 0.0;
  int tier2_n = 0;
  for (const auto& entry : plan) {
    const int attr = schema.index_of(entry.attribute);
    const auto& spec = schema.attributes[attr];
    auto t_it = c.truth.find(entry.attribute);
    AttributeScore as;
    if (t_it == c.truth.end() || t_it->second.empty()) {
      scores.attributes[entry.attribute] = as;  // zero holes this seed
      continue;
    }
    const auto& truth = t_it->second;
    const auto& imputed = c.imputed.at(entry.attribute);
    as.holes = static_cast<long long>(truth.size());
    if (spec.kind == AttributeKind::binary) {
      as.binary = specificity(truth, imputed);
      if (as.binary.specificity) {
        tier2_sum += *as.binary.specificity;
        ++tier2_n;
      }
    } else {
      for (double tol : tolerances.tiers_for(entry.attribute))
        as.accuracy.push_back(accuracy_within(truth, imputed, tol));
      if (as.accuracy.size() >= 2) {
        tier2_sum += as.accuracy[1];
        ++tier2_n;
      }
    }
    scores.attributes[entry.attribute] = std::move(as);
  }
  if (tier2_n > 0) scores.mean_tier2 = tier2_sum / tier2_n;
  return scores;
}

}  // namespace

BenchmarkReport benchmark(const Dataset& data, const BenchmarkInputs& inputs) {
  if (data.provenance != Provenance::normalized)
    throw InputError("benchmark: dataset must be normalized");
  if (!data.complete()) throw InputError("benchmark: dataset must be complete before masking");
  if (inputs.seeds.empty()) throw InputError("benchmark: need at least one seed");
  for (const auto& entry : inputs.plan)
    if (data.schema.index_of(entry.attribute) < 0)
      throw InputError("benchmark: unknown attribute '" + entry.attribute + "' in mask plan");

  BenchmarkReport report;
  report.tolerances = inputs.tolerances;

  for (std::uint64_t seed : inputs.seeds) {
    SplitSpec ss = inputs.split;
    ss.seed = seed;
    const SplitResult parts = split(data, ss);

    Dataset masked = parts.test;
    for (const auto& entry : inputs.plan)
      masked = inject_mcar(masked, entry.attribute, entry.fraction, seed);

    // ground-truth raw values for the masked cells
    std::map<std::string, std::vector<Eigen::Index>> masked_rows;
    for (const auto& entry : inputs.plan) {
      const int attr = data.schema.index_of(entry.attribute);
      auto& rows = masked_rows[entry.attribute];
      for (Eigen::Index r = 0; r < masked.record_count(); ++r)
        if (!masked.attribute_present(r, attr)) rows.push_back(r);
    }

    SeedScores seed_scores;
    seed_scores.seed = seed;

    for (const auto& pspec : inputs.pipelines) {
      PipelineConfig pc = inputs.pipeline_cfg;
      pc.seed = Rng::stream(seed, pspec.variant == PipelineVariant::aann
                                      ? "init:aann"
                                      : "init:pca-nn")
                    .next_u64();
      const PipelineModel model =
          train_pipeline(pspec.variant, parts.train, parts.validation, pspec.mode, pc);

      Collected c;
      for (Eigen::Index r = 0; r < masked.record_count(); ++r) {
        if (masked.row_complete(r)) continue;
        const RecordHole hole = hole_for_row(masked, r);
        GaConfig gc = inputs.ga_cfg;
        gc.seed = Rng::stream(seed, "ga", static_cast<std::uint64_t>(r)).next_u64();
        const ImputedRecord rec = impute_record(model, hole, pspec.mode, gc);
        for (int attr : hole.missing_attrs) {
          const std::string& name = data.schema.attributes[attr].name;
          if (masked_rows.find(name) == masked_rows.end()) continue;
          c.truth[name].push_back(
              decode_attribute(parts.test.rows.row(r).transpose(), data.schema, attr));
          c.imputed[name].push_back(rec.raw[static_cast<std::size_t>(attr)]);
        }
      }
      seed_scores.pipelines.push_back(score_collected(pspec.display_name(), c, data.schema,
                                                      inputs.plan, inputs.tolerances));
    }

    if (inputs.include_baseline) {
      Dataset filled = masked;
      for (const auto& entry : inputs.plan)
        filled = impute_baseline_mean(filled, entry.attribute);
      Collected c;
      for (const auto& [name, rows] : masked_rows) {
        const int attr = data.schema.index_of(name);
        for (Eigen::Index r : rows) {
          c.truth[name].push_back(
              decode_attribute(parts.test.rows.row(r).transpose(), data.schema, attr));
          c.imputed[name].push_back(
              decode_attribute(filled.rows.row(r).transpose(), data.schema, attr));
        }
      }
      seed_scores.pipelines.push_back(
          score_collected("MEAN", c, data.schema, inputs.plan, inputs.tolerances));
    }

    report.per_seed.push_back(std::move(seed_scores));
  }

  // arithmetic mean of per-seed cells
  const std::size_t n_pipelines = report.per_seed.front().pipelines.size();
  for (std::size_t p = 0; p < n_pipelines; ++p) {
    PipelineScores avg;
    avg.name = report.per_seed.front().pipelines[p].name;
    double tier2_sum = 0.0;
    int tier2_n = 0;
    for (const auto& seed_scores : report.per_seed) {
      if (seed_scores.pipelines[p].mean_tier2) {
        tier2_sum += *seed_scores.pipelines[p].mean_tier2;
        ++tier2_n;
      }
    }
    for (const auto& entry : inputs.plan) {
      AttributeScore acc;
      const auto& spec = data.schema.attributes[data.schema.index_of(entry.attribute)];
      int defined = 0;
      double spec_sum = 0, sens_sum = 0, bin_acc_sum = 0;
      int spec_n = 0, sens_n = 0, bin_n = 0;
      for (const auto& seed_scores : report.per_seed) {
        const auto& as = seed_scores.pipelines[p].attributes.at(entry.attribute);
        if (as.holes == 0) continue;
        ++defined;
        acc.holes += as.holes;
        if (spec.kind == AttributeKind::binary) {
          ++bin_n;
          bin_acc_sum += as.binary.accuracy;
          if (as.binary.specificity) {
            spec_sum += *as.binary.specificity;
            ++spec_n;
          }
          if (as.binary.sensitivity) {
            sens_sum += *as.binary.sensitivity;
            ++sens_n;
          }
        } else {
          if (acc.accuracy.empty()) acc.accuracy.assign(as.accuracy.size(), 0.0);
          for (std::size_t t = 0; t < as.accuracy.size(); ++t)
            acc.accuracy[t] += as.accuracy[t];
        }
      }
      if (defined > 0 && spec.kind != AttributeKind::binary)
        for (double& v : acc.accuracy) v /= defined;
      if (bin_n > 0) acc.binary.accuracy = bin_acc_sum / bin_n;
      if (spec_n > 0) acc.binary.specificity = spec_sum / spec_n;
      if (sens_n > 0) acc.binary.sensitivity = sens_sum / sens_n;
      (void)defined;
      avg.attributes[entry.attribute] = std::move(acc);
    }
    if (tier2_n > 0) avg.mean_tier2 = tier2_sum / tier2_n;
    report.averaged.push_back(std::move(avg));
  }
  return report;
}

namespace {

void audit_monotone(const PipelineScores& scores) {
  for (const auto& [attr, as] : scores.attributes) {
    for (std::size_t t = 1; t < as.accuracy.size(); ++t) {
      if (as.accuracy[t] + 1e-9 < as.accuracy[t - 1])
        throw NumericError("report audit: accuracy decreases with tolerance for '" + attr +
                           "' in pipeline '" + scores.name + "'");
    }
  }
}

void render_pipeline_text(std::ostream& out, const PipelineScores& scores,
                          const ToleranceScheme& tolerances) {
  audit_monotone(scores);
  std::size_t n_tiers = 0;
  for (const auto& [attr, as] : scores.attributes)
    n_tiers = std::max(n_tiers, as.accuracy.size());

  out << "== " << scores.name << " ==\n";
  out << std::left << std::setw(20) << "attribute" << std::right;
  for (std::size_t t = 1; t <= n_tiers; ++t)
    out << std::setw(10) << ("tier" + std::to_string(t));
  out << std::setw(10) << "holes" << '\n';
  for (const auto& [attr, as] : scores.attributes) {
    if (!as.accuracy.empty()) {
      std::ostringstream label;
      label << attr << " (";
      const auto& tiers = tolerances.tiers_for(attr);
      for (std::size_t t = 0; t < tiers.size(); ++t) {
        if (t) label << '/';
        label << tiers[t];
      }
      label << ')';
      out << std::left << std::setw(20) << label.str() << std::right;
      for (std::size_t t = 0; t < n_tiers; ++t) {
        if (t < as.accuracy.size())
          out << std::setw(10) << fmt2(as.accuracy[t]);
        else
          out << std::setw(10) << "-";
      }
      out << std::setw(10) << as.holes << '\n';
    } else if (as.holes > 0) {
      out << std::left << std::setw(20) << attr << std::right;
      out << "  specificity " << (as.binary.specificity ? fmt2(*as.binary.specificity) : "n/a")
          << "  sensitivity " << (as.binary.sensitivity ? fmt2(*as.binary.sensitivity) : "n/a")
          << "  accuracy " << fmt2(as.binary.accuracy) << "  holes " << as.holes << '\n';
    } else {
      out << std::left << std::setw(20) << attr << "  (no holes)\n";
    }
  }
  if (scores.mean_tier2)
    out << "mean tier-2 accuracy: " << fmt2(*scores.mean_tier2) << '\n';
  out << '\n';
}

void render_pipeline_csv(std::ostream& out, const PipelineScores& scores,
                         const ToleranceScheme& tolerances, const std::string& seed_col) {
  audit_monotone(scores);
  for (const auto& [attr, as] : scores.attributes) {
    if (!as.accuracy.empty()) {
      const auto& tiers = tolerances.tiers_for(attr);
      for (std::size_t t = 0; t < as.accuracy.size(); ++t) {
        out << seed_col << scores.name << ',' << attr << ",tier" << (t + 1) << ','
            << fmtg(tiers[t]) << ',' << fmtg(as.accuracy[t]) << ',' << as.holes << '\n';
      }
    } else if (as.holes > 0) {
      out << seed_col << scores.name << ',' << attr << ",specificity,,"
          << (as.binary.specificity ? fmtg(*as.binary.specificity) : "n/a") << ','
          << as.holes << '\n';
      out << seed_col << scores.name << ',' << attr << ",sensitivity,,"
          << (as.binary.sensitivity ? fmtg(*as.binary.sensitivity) : "n/a") << ','
          << as.holes << '\n';
      out << seed_col << scores.name << ',' << attr << ",accuracy,,"
          << fmtg(as.binary.accuracy) << ',' << as.holes << '\n';
    }
  }
  if (scores.mean_tier2)
    out << seed_col << scores.name << ",ALL,mean_tier2,," << fmtg(*scores.mean_tier2) << ",\n";
}

}  // namespace

std::string render_report_text(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "imputation accuracy report (" << report.per_seed.size() << " seed"
      << (report.per_seed.size() == 1 ? "" : "s") << ", averaged)\n\n";
  for (const auto& scores : report.averaged)
    render_pipeline_text(out, scores, report.tolerances);
  out << "note: 'mean tier-2 accuracy' averages each masked attribute's accuracy at\n"
         "its second tolerance tier, substituting specificity for binary attributes;\n"
         "averaged cells are arithmetic means of the per-seed values.\n";
  return out.str();
}

std::string render_report_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "pipeline,attribute,metric,tolerance,value,holes\n";
  for (const auto& scores : report.averaged)
    render_pipeline_csv(out, scores, report.tolerances, "");
  return out.str();
}

std::string render_seed_csv(const SeedScores& seed_scores, const ToleranceScheme& tolerances) {
  std::ostringstream out;
  out << "seed,pipeline,attribute,metric,tolerance,value,holes\n";
  for (const auto& scores : seed_scores.pipelines)
    render_pipeline_csv(out, scores, tolerances, std::to_string(seed_scores.seed) + ",");
  return out.str();
}

}  // namespace impute
