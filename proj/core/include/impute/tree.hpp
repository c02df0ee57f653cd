#ifndef IMPUTE_TREE_HPP
#define IMPUTE_TREE_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "impute/dataset.hpp"

namespace impute {

struct ClassCounts {
  std::vector<long long> counts;
  long long total = 0;

  static ClassCounts of(std::initializer_list<long long> c);
};

/// Class entropy in bits: -sum (s_i/s) log2(s_i/s), empty classes contribute 0.
double entropy(const ClassCounts& c);

/// Weighted entropy of a partition: sum_j (s_j/s) * entropy(subset_j).
double expected_info(const std::vector<ClassCounts>& partition);

/// Information gained by branching: entropy(parent) - expected_info(partition).
/// The partition cells must sum to the parent.
double gain(const ClassCounts& parent, const std::vector<ClassCounts>& partition);

/// Discretization of a target attribute into contiguous class labels.
/// Continuous targets use bins anchored at the attribute minimum; binary and
/// categorical targets use one class per value/level.
struct IntervalScheme {
  std::string attribute;
  double bin_width = 0.0;
  std::vector<double> edges;  // classes+1 ascending edges when binned
  int classes = 0;
  bool binned = false;

  int label_of(double raw_value) const;
  /// [lo, hi] in raw units for a binned label.
  std::pair<double, double> raw_interval(int label) const;

  static IntervalScheme bins(const AttributeSpec& spec, double width);
  static IntervalScheme levels(const AttributeSpec& spec);
};

struct SplitTest {
  int attribute = -1;       // schema attribute index
  bool is_threshold = true; // threshold on continuous vs branch per level
  double threshold = 0.0;
};

struct TreeNode {
  long long population = 0;
  std::vector<long long> distribution;  // class counts of the training rows here
  int label = -1;                       // majority class
  std::optional<SplitTest> test;
  std::vector<std::unique_ptr<TreeNode>> children;

  bool is_leaf() const { return !test.has_value(); }
};

struct TreeParams {
  long long min_leaf = 25;
  double min_gain = 1e-3;
  int max_depth = 12;
};

struct DecisionTree {
  std::string target;
  IntervalScheme scheme;
  std::unique_ptr<TreeNode> root;
};

/// Best single split of the given rows by information gain. Continuous
/// candidates are midpoints between consecutive distinct values; ties go to
/// the earlier schema attribute, then the smaller threshold. Returns nothing
/// when the best gain falls below min_gain.
struct SplitChoice {
  SplitTest test;
  double gain = 0.0;
};
std::optional<SplitChoice> best_split(const Eigen::MatrixXd& attr_values,
                                      const std::vector<int>& labels,
                                      const std::vector<Eigen::Index>& rows,
                                      const std::vector<int>& candidate_attrs,
                                      const Schema& schema, int classes,
                                      double min_gain);

/// Per-record raw attribute values (continuous raw units, categorical level
/// index, binary 0/1) for a normalized dataset; induction and prediction
/// work in this space.
Eigen::MatrixXd attribute_values(const Dataset& d);

/// Grows a tree classifying the target attribute's interval label from all
/// other attributes. Rows where the target is missing are skipped; feature
/// values must be present (train on the complete split).
DecisionTree induce(const Dataset& train, const std::string& target,
                    IntervalScheme scheme, const TreeParams& params);

/// Root-to-leaf descent. Attributes are given per schema index; a missing
/// tested attribute follows the child with the larger training population.
int predict_interval(const DecisionTree& tree,
                     std::span<const std::optional<double>> attrs);

/// Line-oriented text form, one node per line, two-space indent per depth.
std::string tree_to_text(const DecisionTree& tree, const Schema& schema);
DecisionTree tree_from_text(const std::string& text, const Schema& schema);
void save_tree(const DecisionTree& tree, const Schema& schema,
               const std::filesystem::path& path);
DecisionTree load_tree(const std::filesystem::path& path, const Schema& schema);

}  // namespace impute

#endif
