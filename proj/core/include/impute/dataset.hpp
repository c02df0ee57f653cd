#ifndef IMPUTE_DATASET_HPP
#define IMPUTE_DATASET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace impute {

enum class AttributeKind { continuous, categorical, binary };

/// One column group of the encoded matrix. Continuous and binary attributes
/// occupy a single column; a categorical attribute with L levels occupies
/// ceil(log2 L) columns holding its level index as binary digits.
struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::continuous;
  double min = 0.0;   // continuous only
  double max = 1.0;   // continuous only
  bool integral = false;  // continuous attribute that only takes whole values
  std::vector<std::string> levels;  // categorical only
  int encoded_width = 1;

  double range() const { return max - min; }
};

AttributeSpec continuous_attribute(std::string name, double min, double max,
                                   bool integral = false);
AttributeSpec categorical_attribute(std::string name, std::vector<std::string> levels);
AttributeSpec binary_attribute(std::string name);

struct Schema {
  std::vector<AttributeSpec> attributes;
  int total_width = 0;
  std::vector<int> offsets;  // first encoded column of each attribute

  int attribute_count() const { return static_cast<int>(attributes.size()); }
  /// Index of the named attribute, -1 if absent.
  int index_of(const std::string& name) const;

  /// Validates the attribute list and computes widths/offsets.
  static Schema make(std::vector<AttributeSpec> attrs);

  /// Key-value schema file: blocks introduced by "attribute = <name>",
  /// followed by "kind = ...", "min/max = ..." or "levels = a,b,c".
  static Schema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_text() const;
  static Schema parse(const std::string& text);
};

enum class Provenance { raw, normalized };

/// Rows hold the ground-truth values even where mask is false; operations
/// that fill holes always return a new matrix, so scoring against the
/// original remains possible.
struct Dataset {
  Schema schema;
  Eigen::MatrixXd rows;  // M x total_width
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // true = present
  Provenance provenance = Provenance::raw;

  Eigen::Index record_count() const { return rows.rows(); }
  bool attribute_present(Eigen::Index row, int attr) const;
  bool row_complete(Eigen::Index row) const;
  bool complete() const;
};

struct SplitSpec {
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
};

struct LoadStats {
  std::size_t clamped = 0;  // out-of-range continuous cells clamped (lenient mode)
};

/// Reads a CSV with a header row matching the schema attribute names.
/// Empty cells mark missing values; any other token must parse per the
/// attribute kind. In strict mode an out-of-range continuous value is an
/// error; otherwise it is clamped and counted in stats.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 bool strict = true, LoadStats* stats = nullptr);

/// Maps raw attribute values onto [0,1] columns: min-max scaling for
/// continuous, binary digit vectors (most significant bit first) for
/// categorical levels, pass-through for binary.
Dataset encode_normalize(const Dataset& raw);

/// Inverse of encode_normalize for one row: per attribute, the raw
/// continuous value, the categorical level index, or the rounded 0/1 bit.
/// Categorical bit groups snap to the valid level pattern with minimum
/// Euclidean distance, ties to the lower index.
std::vector<double> decode(const Eigen::VectorXd& row, const Schema& schema);

/// decode() for a single attribute.
double decode_attribute(const Eigen::VectorXd& row, const Schema& schema, int attr);

/// Encodes one attribute's raw value (continuous raw units, level index, or
/// 0/1) into its normalized column group.
Eigen::VectorXd encode_attribute(const Schema& schema, int attr, double raw_value);

/// Deterministic shuffle-and-partition. Validation and test take
/// floor(fraction * M) rows each; the remainder goes to train.
SplitResult split(const Dataset& d, const SplitSpec& spec);

/// Clears the mask of round(fraction * M) uniformly chosen rows for one
/// attribute. Values stay in place; only the mask changes.
Dataset inject_mcar(const Dataset& d, const std::string& attribute, double fraction,
                    std::uint64_t seed);

}  // namespace impute

#endif
