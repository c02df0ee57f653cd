#include "impute/config.hpp"

#include <fstream>
#include <sstream>

#include "impute/errors.hpp"

namespace impute {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw InputError(where + ": expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw InputError(where + ": trailing characters in '" + v + "'");
  return d;
}

long long to_int(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  long long i = 0;
  try {
    i = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw InputError(where + ": expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw InputError(where + ": trailing characters in '" + v + "'");
  return i;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError(where + ": expected true/false, got '" + v + "'");
}

}  // namespace

PipelineVariant parse_pipeline_name(const std::string& name) {
  if (name == "aann") return PipelineVariant::aann;
  if (name == "pca-nn") return PipelineVariant::pca_nn;
  throw InputError("unknown pipeline '" + name + "' (expected aann or pca-nn)");
}

BoundsMode parse_bounds_name(const std::string& name) {
  if (name == "full") return BoundsMode::full_range;
  if (name == "tree") return BoundsMode::tree_interval;
  throw InputError("unknown bounds mode '" + name + "' (expected full or tree)");
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;

  auto resolve = [&base_dir](const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base_dir.empty()) return base_dir / path;
    return path;
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "config line " + std::to_string(lineno);
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (section == "data") {
      if (key == "schema") cfg.schema_path = resolve(value);
      else if (key == "data") cfg.data_path = resolve(value);
      else if (key == "strict") cfg.strict_load = to_bool(value, where);
      else throw InputError(where + ": unknown key '" + key + "' in [data]");
    } else if (section == "split") {
      if (key == "train") cfg.split.train_fraction = to_double(value, where);
      else if (key == "validation") cfg.split.validation_fraction = to_double(value, where);
      else if (key == "test") cfg.split.test_fraction = to_double(value, where);
      else throw InputError(where + ": unknown key '" + key + "' in [split]");
    } else if (section == "model") {
      if (key == "pipeline") cfg.pipeline = parse_pipeline_name(value);
      else if (key == "bounds") cfg.bounds = parse_bounds_name(value);
      else if (key == "hidden") cfg.pipeline_cfg.hidden_nodes = static_cast<int>(to_int(value, where));
      else if (key == "cycles") cfg.pipeline_cfg.cycles = static_cast<int>(to_int(value, where));
      else if (key == "patience") cfg.pipeline_cfg.patience = static_cast<int>(to_int(value, where));
      else if (key == "pca_dimension") cfg.pipeline_cfg.pca_dimension = static_cast<int>(to_int(value, where));
      else if (key == "pca_tolerance") cfg.pipeline_cfg.pca_tolerance = to_double(value, where);
      else throw InputError(where + ": unknown key '" + key + "' in [model]");
    } else if (section == "ga") {
      if (key == "population") cfg.ga.population = static_cast<int>(to_int(value, where));
      else if (key == "generations") cfg.ga.generations = static_cast<int>(to_int(value, where));
      else if (key == "q") cfg.ga.selection_q = to_double(value, where);
      else if (key == "crossover") cfg.ga.crossover_rate = to_double(value, where);
      else if (key == "mutation") cfg.ga.mutation_rate = to_double(value, where);
      else if (key == "b") cfg.ga.mutation_shape = to_double(value, where);
      else throw InputError(where + ": unknown key '" + key + "' in [ga]");
    } else if (section == "tree") {
      if (key == "min_leaf") cfg.pipeline_cfg.tree.min_leaf = to_int(value, where);
      else if (key == "min_gain") cfg.pipeline_cfg.tree.min_gain = to_double(value, where);
      else if (key == "max_depth") cfg.pipeline_cfg.tree.max_depth = static_cast<int>(to_int(value, where));
      else if (key.rfind("width.", 0) == 0)
        cfg.pipeline_cfg.interval_widths[key.substr(6)] = to_double(value, where);
      else throw InputError(where + ": unknown key '" + key + "' in [tree]");
    } else if (section == "eval") {
      if (key.rfind("tolerances.", 0) == 0) {
        std::vector<double> tiers;
        for (const auto& tok : split_list(value)) tiers.push_back(to_double(tok, where));
        if (tiers.empty()) throw InputError(where + ": empty tolerance list");
        for (std::size_t i = 1; i < tiers.size(); ++i)
          if (tiers[i] <= tiers[i - 1])
            throw InputError(where + ": tolerances must be strictly increasing");
        cfg.tolerance_overrides[key.substr(11)] = std::move(tiers);
      } else {
        throw InputError(where + ": unknown key '" + key + "' in [eval]");
      }
    } else if (section == "benchmark") {
      if (key == "pipelines") {
        cfg.bench_pipelines.clear();
        for (const auto& tok : split_list(value)) {
          auto colon = tok.find(':');
          if (colon == std::string::npos)
            throw InputError(where + ": pipeline entry '" + tok + "' must be <pipeline>:<bounds>");
          PipelineSpec spec;
          spec.variant = parse_pipeline_name(trim(tok.substr(0, colon)));
          spec.mode = parse_bounds_name(trim(tok.substr(colon + 1)));
          cfg.bench_pipelines.push_back(spec);
        }
      } else if (key == "attributes") {
        cfg.plan_attributes = split_list(value);
      } else if (key == "fraction") {
        cfg.mask_fraction = to_double(value, where);
      } else if (key == "seeds") {
        cfg.bench_seeds.clear();
        for (const auto& tok : split_list(value))
          cfg.bench_seeds.push_back(static_cast<std::uint64_t>(to_int(tok, where)));
      } else {
        throw InputError(where + ": unknown key '" + key + "' in [benchmark]");
      }
    } else if (section == "sweep") {
      if (key == "hidden") {
        cfg.sweep_hidden.clear();
        for (const auto& tok : split_list(value))
          cfg.sweep_hidden.push_back(static_cast<int>(to_int(tok, where)));
      } else if (key == "cycles") {
        cfg.sweep_cycles = static_cast<int>(to_int(value, where));
      } else {
        throw InputError(where + ": unknown key '" + key + "' in [sweep]");
      }
    } else if (section == "run") {
      if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(value, where));
      else if (key == "out") cfg.out_dir = resolve(value);
      else throw InputError(where + ": unknown key '" + key + "' in [run]");
    } else if (section.empty()) {
      throw InputError(where + ": key outside any [section]");
    } else {
      throw InputError(where + ": unknown section [" + section + "]");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

ToleranceScheme resolve_tolerances(const Schema& schema, const RunConfig& cfg) {
  ToleranceScheme scheme = ToleranceScheme::defaults_for(schema);
  for (const auto& [attr, tiers] : cfg.tolerance_overrides) {
    if (schema.index_of(attr) < 0)
      throw InputError("tolerances: unknown attribute '" + attr + "'");
    scheme.continuous[attr] = tiers;
  }
  return scheme;
}

}  // namespace impute
