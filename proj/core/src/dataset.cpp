#include "impute/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "impute/errors.hpp"
#include "impute/rng.hpp"

namespace impute {

namespace {

int bits_for_levels(std::size_t levels) {
  int bits = 1;
  while ((std::size_t{1} << bits) < levels) ++bits;
  return bits;
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

double parse_number(const std::string& cell, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw InputError(what + ": cannot parse '" + cell + "' as a number");
  }
  if (used != cell.size())
    throw InputError(what + ": trailing characters in '" + cell + "'");
  return v;
}

/// Bit j of the level pattern, most significant first.
double level_bit(int level, int width, int j) {
  return static_cast<double>((level >> (width - 1 - j)) & 1);
}

}  // namespace

AttributeSpec continuous_attribute(std::string name, double min, double max,
                                   bool integral) {
  AttributeSpec a;
  a.name = std::move(name);
  a.kind = AttributeKind::continuous;
  a.min = min;
  a.max = max;
  a.integral = integral;
  a.encoded_width = 1;
  return a;
}

AttributeSpec categorical_attribute(std::string name, std::vector<std::string> levels) {
  AttributeSpec a;
  a.name = std::move(name);
  a.kind = AttributeKind::categorical;
  a.levels = std::move(levels);
  a.encoded_width = bits_for_levels(a.levels.size());
  return a;
}

AttributeSpec binary_attribute(std::string name) {
  AttributeSpec a;
  a.name = std::move(name);
  a.kind = AttributeKind::binary;
  a.min = 0.0;
  a.max = 1.0;
  a.encoded_width = 1;
  return a;
}

int Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == name) return static_cast<int>(i);
  return -1;
}

Schema Schema::make(std::vector<AttributeSpec> attrs) {
  if (attrs.empty()) throw InputError("schema: no attributes");
  std::set<std::string> names;
  Schema s;
  s.attributes = std::move(attrs);
  int off = 0;
  for (auto& a : s.attributes) {
    if (a.name.empty()) throw InputError("schema: empty attribute name");
    if (a.name.find_first_of(" \t,/\\") != std::string::npos)
      throw InputError("schema: attribute name '" + a.name +
                       "' may not contain whitespace, commas or slashes");
    if (!names.insert(a.name).second)
      throw InputError("schema: duplicate attribute name '" + a.name + "'");
    switch (a.kind) {
      case AttributeKind::continuous:
        if (!(a.min < a.max))
          throw InputError("schema: attribute '" + a.name + "' needs min < max");
        a.encoded_width = 1;
        break;
      case AttributeKind::binary:
        a.min = 0.0;
        a.max = 1.0;
        a.encoded_width = 1;
        break;
      case AttributeKind::categorical: {
        if (a.levels.size() < 2)
          throw InputError("schema: attribute '" + a.name + "' needs at least 2 levels");
        std::set<std::string> lv(a.levels.begin(), a.levels.end());
        if (lv.size() != a.levels.size())
          throw InputError("schema: attribute '" + a.name + "' has duplicate levels");
        a.encoded_width = bits_for_levels(a.levels.size());
        break;
      }
    }
    s.offsets.push_back(off);
    off += a.encoded_width;
  }
  s.total_width = off;
  return s;
}

std::string Schema::to_text() const {
  std::ostringstream out;
  for (const auto& a : attributes) {
    out << "attribute = " << a.name << "\n";
    switch (a.kind) {
      case AttributeKind::continuous:
        out << "kind = continuous\n";
        out << "min = " << a.min << "\n";
        out << "max = " << a.max << "\n";
        if (a.integral) out << "integer = true\n";
        break;
      case AttributeKind::binary:
        out << "kind = binary\n";
        break;
      case AttributeKind::categorical: {
        out << "kind = categorical\n";
        out << "levels = ";
        for (std::size_t i = 0; i < a.levels.size(); ++i) {
          if (i) out << ",";
          out << a.levels[i];
        }
        out << "\n";
        break;
      }
    }
    out << "\n";
  }
  return out.str();
}

Schema Schema::parse(const std::string& text) {
  std::istringstream in(text);
  std::vector<AttributeSpec> attrs;
  AttributeSpec cur;
  bool open = false;
  bool has_kind = false;

  auto flush = [&]() {
    if (!open) return;
    if (!has_kind)
      throw InputError("schema: attribute '" + cur.name + "' missing kind");
    attrs.push_back(cur);
    cur = AttributeSpec{};
    open = false;
    has_kind = false;
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("schema line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "attribute") {
      flush();
      cur.name = value;
      open = true;
    } else if (!open) {
      throw InputError("schema line " + std::to_string(lineno) +
                       ": '" + key + "' before any attribute");
    } else if (key == "kind") {
      if (value == "continuous") cur.kind = AttributeKind::continuous;
      else if (value == "categorical") cur.kind = AttributeKind::categorical;
      else if (value == "binary") cur.kind = AttributeKind::binary;
      else throw InputError("schema line " + std::to_string(lineno) + ": unknown kind '" + value + "'");
      has_kind = true;
    } else if (key == "min") {
      cur.min = parse_number(value, "schema line " + std::to_string(lineno));
    } else if (key == "max") {
      cur.max = parse_number(value, "schema line " + std::to_string(lineno));
    } else if (key == "integer") {
      if (value == "true") cur.integral = true;
      else if (value == "false") cur.integral = false;
      else throw InputError("schema line " + std::to_string(lineno) +
                            ": integer must be true or false");
    } else if (key == "levels") {
      cur.levels.clear();
      for (auto& tok : split_fields(value, ',')) {
        std::string t = trim(tok);
        if (t.empty())
          throw InputError("schema line " + std::to_string(lineno) + ": empty level");
        cur.levels.push_back(t);
      }
    } else {
      throw InputError("schema line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  flush();
  return Schema::make(std::move(attrs));
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Schema::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write schema file " + path.string());
  out << to_text();
}

bool Dataset::attribute_present(Eigen::Index row, int attr) const {
  return mask(row, schema.offsets[attr]);
}

bool Dataset::row_complete(Eigen::Index row) const {
  for (int c = 0; c < schema.total_width; ++c)
    if (!mask(row, c)) return false;
  return true;
}

bool Dataset::complete() const {
  return mask.all();
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 bool strict, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  auto header = split_fields(trim(line), ',');
  if (static_cast<int>(header.size()) != schema.attribute_count())
    throw InputError(path.string() + ": header has " + std::to_string(header.size()) +
                     " columns, schema defines " + std::to_string(schema.attribute_count()));
  for (int a = 0; a < schema.attribute_count(); ++a) {
    if (trim(header[a]) != schema.attributes[a].name)
      throw InputError(path.string() + ": header column " + std::to_string(a + 1) +
                       " is '" + trim(header[a]) + "', expected '" +
                       schema.attributes[a].name + "'");
  }

  std::vector<std::vector<double>> values;   // per row, per attribute raw value
  std::vector<std::vector<bool>> present;
  std::size_t clamped = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_fields(line, ',');
    if (static_cast<int>(cells.size()) != schema.attribute_count())
      throw InputError(path.string() + " line " + std::to_string(lineno) + ": expected " +
                       std::to_string(schema.attribute_count()) + " cells, found " +
                       std::to_string(cells.size()));
    std::vector<double> row(schema.attribute_count(), 0.0);
    std::vector<bool> pres(schema.attribute_count(), true);
    for (int a = 0; a < schema.attribute_count(); ++a) {
      const auto& spec = schema.attributes[a];
      std::string cell = trim(cells[a]);
      if (cell.empty()) {
        pres[a] = false;
        continue;
      }
      const std::string where =
          path.string() + " line " + std::to_string(lineno) + ", attribute '" + spec.name + "'";
      switch (spec.kind) {
        case AttributeKind::continuous: {
          double v = parse_number(cell, where);
          if (v < spec.min || v > spec.max) {
            if (strict)
              throw InputError(where + ": value " + cell + " outside [" +
                               std::to_string(spec.min) + ", " + std::to_string(spec.max) + "]");
            v = std::clamp(v, spec.min, spec.max);
            ++clamped;
          }
          row[a] = v;
          break;
        }
        case AttributeKind::binary: {
          if (cell == "0") row[a] = 0.0;
          else if (cell == "1") row[a] = 1.0;
          else throw InputError(where + ": binary cell must be 0 or 1, got '" + cell + "'");
          break;
        }
        case AttributeKind::categorical: {
          auto it = std::find(spec.levels.begin(), spec.levels.end(), cell);
          if (it == spec.levels.end())
            throw InputError(where + ": unknown level '" + cell + "'");
          row[a] = static_cast<double>(it - spec.levels.begin());
          break;
        }
      }
    }
    values.push_back(std::move(row));
    present.push_back(std::move(pres));
  }
  if (values.empty()) throw InputError(path.string() + ": no data rows");
  if (stats) stats->clamped = clamped;

  const Eigen::Index m = static_cast<Eigen::Index>(values.size());
  Dataset d;
  d.schema = schema;
  d.provenance = Provenance::raw;
  d.rows = Eigen::MatrixXd::Zero(m, schema.total_width);
  d.mask.setConstant(m, schema.total_width, true);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (int a = 0; a < schema.attribute_count(); ++a) {
      const int off = schema.offsets[a];
      const int w = schema.attributes[a].encoded_width;
      // Raw provenance stores the attribute value in the group's first column.
      d.rows(r, off) = values[r][a];
      for (int j = 0; j < w; ++j) d.mask(r, off + j) = present[r][a];
    }
  }
  return d;
}

Dataset encode_normalize(const Dataset& raw) {
  if (raw.provenance != Provenance::raw)
    throw InputError("encode_normalize: dataset already normalized");
  Dataset d;
  d.schema = raw.schema;
  d.mask = raw.mask;
  d.provenance = Provenance::normalized;
  d.rows = Eigen::MatrixXd::Zero(raw.rows.rows(), raw.schema.total_width);
  for (Eigen::Index r = 0; r < raw.rows.rows(); ++r) {
    for (int a = 0; a < raw.schema.attribute_count(); ++a) {
      const int off = raw.schema.offsets[a];
      d.rows.block(r, off, 1, raw.schema.attributes[a].encoded_width) =
          encode_attribute(raw.schema, a, raw.rows(r, off)).transpose();
    }
  }
  return d;
}

Eigen::VectorXd encode_attribute(const Schema& schema, int attr, double raw_value) {
  const auto& spec = schema.attributes[attr];
  Eigen::VectorXd out(spec.encoded_width);
  switch (spec.kind) {
    case AttributeKind::continuous:
      out(0) = (raw_value - spec.min) / spec.range();
      break;
    case AttributeKind::binary:
      out(0) = raw_value;
      break;
    case AttributeKind::categorical: {
      const int level = static_cast<int>(std::llround(raw_value));
      if (level < 0 || level >= static_cast<int>(spec.levels.size()))
        throw InputError("encode: level index " + std::to_string(level) +
                         " out of range for attribute '" + spec.name + "'");
      for (int j = 0; j < spec.encoded_width; ++j)
        out(j) = level_bit(level, spec.encoded_width, j);
      break;
    }
  }
  return out;
}

double decode_attribute(const Eigen::VectorXd& row, const Schema& schema, int attr) {
  const auto& spec = schema.attributes[attr];
  const int off = schema.offsets[attr];
  switch (spec.kind) {
    case AttributeKind::continuous: {
      const double raw = spec.min + row(off) * spec.range();
      if (!spec.integral) return raw;
      return std::clamp(std::round(raw), spec.min, spec.max);
    }
    case AttributeKind::binary:
      return row(off) >= 0.5 ? 1.0 : 0.0;
    case AttributeKind::categorical: {
      const int w = spec.encoded_width;
      int best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (int level = 0; level < static_cast<int>(spec.levels.size()); ++level) {
        double d2 = 0.0;
        for (int j = 0; j < w; ++j) {
          const double diff = row(off + j) - level_bit(level, w, j);
          d2 += diff * diff;
        }
        if (d2 < best_d2) {  // ties keep the lower index
          best_d2 = d2;
          best = level;
        }
      }
      return static_cast<double>(best);
    }
  }
  return 0.0;
}

std::vector<double> decode(const Eigen::VectorXd& row, const Schema& schema) {
  if (row.size() != schema.total_width)
    throw InputError("decode: row has " + std::to_string(row.size()) +
                     " columns, schema total width is " + std::to_string(schema.total_width));
  std::vector<double> out(schema.attribute_count());
  for (int a = 0; a < schema.attribute_count(); ++a)
    out[a] = decode_attribute(row, schema, a);
  return out;
}

namespace {

Dataset take_rows(const Dataset& d, const std::vector<Eigen::Index>& idx,
                  std::size_t begin, std::size_t end) {
  Dataset out;
  out.schema = d.schema;
  out.provenance = d.provenance;
  const Eigen::Index n = static_cast<Eigen::Index>(end - begin);
  out.rows.resize(n, d.schema.total_width);
  out.mask.resize(n, d.schema.total_width);
  for (Eigen::Index r = 0; r < n; ++r) {
    out.rows.row(r) = d.rows.row(idx[begin + r]);
    out.mask.row(r) = d.mask.row(idx[begin + r]);
  }
  return out;
}

}  // namespace

SplitResult split(const Dataset& d, const SplitSpec& spec) {
  const double sum = spec.train_fraction + spec.validation_fraction + spec.test_fraction;
  if (spec.train_fraction <= 0 || spec.validation_fraction <= 0 || spec.test_fraction <= 0)
    throw InputError("split: fractions must be positive");
  if (std::abs(sum - 1.0) > 1e-9)
    throw InputError("split: fractions sum to " + std::to_string(sum) + ", expected 1");
  if (d.provenance != Provenance::normalized)
    throw InputError("split: dataset must be normalized first");

  const Eigen::Index m = d.record_count();
  std::vector<Eigen::Index> idx(m);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng = Rng::stream(spec.seed, "split");
  for (Eigen::Index i = m - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.index(static_cast<std::size_t>(i) + 1)]);

  // floor for the two smaller partitions; leftover rows go to train
  const auto n_val = static_cast<std::size_t>(spec.validation_fraction * static_cast<double>(m));
  const auto n_test = static_cast<std::size_t>(spec.test_fraction * static_cast<double>(m));
  const std::size_t n_train = static_cast<std::size_t>(m) - n_val - n_test;
  if (n_train == 0 || n_val == 0 || n_test == 0)
    throw InputError("split: a partition would be empty (M=" + std::to_string(m) + ")");

  SplitResult r;
  r.train = take_rows(d, idx, 0, n_train);
  r.validation = take_rows(d, idx, n_train, n_train + n_val);
  r.test = take_rows(d, idx, n_train + n_val, n_train + n_val + n_test);
  return r;
}

Dataset inject_mcar(const Dataset& d, const std::string& attribute, double fraction,
                    std::uint64_t seed) {
  const int attr = d.schema.index_of(attribute);
  if (attr < 0) throw InputError("inject_mcar: unknown attribute '" + attribute + "'");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw InputError("inject_mcar: fraction must be in (0,1)");
  const Eigen::Index m = d.record_count();
  for (Eigen::Index r = 0; r < m; ++r)
    if (!d.attribute_present(r, attr))
      throw InputError("inject_mcar: attribute '" + attribute + "' already has holes");

  const auto holes = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  if (holes == 0)
    throw InputError("inject_mcar: fraction " + std::to_string(fraction) +
                     " yields zero holes for M=" + std::to_string(m));

  std::vector<Eigen::Index> idx(m);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng = Rng::stream(seed, "mask:" + attribute);
  for (Eigen::Index i = m - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.index(static_cast<std::size_t>(i) + 1)]);

  Dataset out = d;
  const int off = d.schema.offsets[attr];
  const int w = d.schema.attributes[attr].encoded_width;
  for (std::size_t k = 0; k < holes; ++k)
    for (int j = 0; j < w; ++j) out.mask(idx[k], off + j) = false;
  return out;
}

}  // namespace impute
