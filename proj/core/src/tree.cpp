#include "impute/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "impute/errors.hpp"

namespace impute {

namespace {

double entropy_terms(const std::vector<long long>& counts, long long total) {
  double h = 0.0;
  for (long long c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ClassCounts ClassCounts::of(std::initializer_list<long long> c) {
  ClassCounts cc;
  cc.counts = c;
  for (long long v : cc.counts) cc.total += v;
  return cc;
}

double entropy(const ClassCounts& c) {
  if (c.total <= 0) throw InputError("entropy: empty class counts");
  return entropy_terms(c.counts, c.total);
}

double expected_info(const std::vector<ClassCounts>& partition) {
  long long total = 0;
  for (const auto& p : partition) total += p.total;
  if (total <= 0) throw InputError("expected_info: all subsets empty");
  double e = 0.0;
  for (const auto& p : partition) {
    if (p.total == 0) continue;
    e += (static_cast<double>(p.total) / static_cast<double>(total)) *
         entropy_terms(p.counts, p.total);
  }
  return e;
}

double gain(const ClassCounts& parent, const std::vector<ClassCounts>& partition) {
  std::vector<long long> sums(parent.counts.size(), 0);
  for (const auto& p : partition) {
    if (p.counts.size() != parent.counts.size())
      throw InputError("gain: partition class count mismatch");
    for (std::size_t i = 0; i < p.counts.size(); ++i) sums[i] += p.counts[i];
  }
  if (sums != parent.counts) throw InputError("gain: partition does not sum to parent");
  return entropy(parent) - expected_info(partition);
}

int IntervalScheme::label_of(double raw_value) const {
  if (!binned) {
    const int v = static_cast<int>(std::llround(raw_value));
    return std::clamp(v, 0, classes - 1);
  }
  if (raw_value >= edges.back()) return classes - 1;  // last bin closed at max
  for (int k = 0; k < classes; ++k)
    if (raw_value < edges[static_cast<std::size_t>(k) + 1]) return k;
  return classes - 1;
}

std::pair<double, double> IntervalScheme::raw_interval(int label) const {
  if (!binned) throw InputError("raw_interval: scheme is not binned");
  if (label < 0 || label >= classes)
    throw InputError("raw_interval: label " + std::to_string(label) + " out of range");
  return {edges[label], edges[static_cast<std::size_t>(label) + 1]};
}

IntervalScheme IntervalScheme::bins(const AttributeSpec& spec, double width) {
  if (spec.kind != AttributeKind::continuous)
    throw InputError("IntervalScheme::bins: attribute '" + spec.name + "' is not continuous");
  if (!(width > 0.0)) throw InputError("IntervalScheme::bins: width must be positive");
  IntervalScheme s;
  s.attribute = spec.name;
  s.bin_width = width;
  s.binned = true;
  double e = spec.min;
  s.edges.push_back(e);
  while (e + width < spec.max - 1e-12) {
    e += width;
    s.edges.push_back(e);
  }
  s.edges.push_back(spec.max);
  s.classes = static_cast<int>(s.edges.size()) - 1;
  return s;
}

IntervalScheme IntervalScheme::levels(const AttributeSpec& spec) {
  IntervalScheme s;
  s.attribute = spec.name;
  s.binned = false;
  switch (spec.kind) {
    case AttributeKind::binary:
      s.classes = 2;
      break;
    case AttributeKind::categorical:
      s.classes = static_cast<int>(spec.levels.size());
      break;
    case AttributeKind::continuous:
      throw InputError("IntervalScheme::levels: attribute '" + spec.name + "' is continuous");
  }
  return s;
}

Eigen::MatrixXd attribute_values(const Dataset& d) {
  if (d.provenance != Provenance::normalized)
    throw InputError("attribute_values: dataset must be normalized");
  const Eigen::Index m = d.record_count();
  const int a_count = d.schema.attribute_count();
  Eigen::MatrixXd vals(m, a_count);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::VectorXd row = d.rows.row(r).transpose();
    for (int a = 0; a < a_count; ++a) vals(r, a) = decode_attribute(row, d.schema, a);
  }
  return vals;
}

std::optional<SplitChoice> best_split(const Eigen::MatrixXd& attr_values,
                                      const std::vector<int>& labels,
                                      const std::vector<Eigen::Index>& rows,
                                      const std::vector<int>& candidate_attrs,
                                      const Schema& schema, int classes,
                                      double min_gain) {
  const long long n = static_cast<long long>(rows.size());
  if (n < 2) return std::nullopt;

  std::vector<long long> parent(classes, 0);
  for (Eigen::Index r : rows) ++parent[labels[static_cast<std::size_t>(r)]];
  const double parent_entropy = entropy_terms(parent, n);
  if (parent_entropy == 0.0) return std::nullopt;

  std::optional<SplitChoice> best;

  for (int attr : candidate_attrs) {
    const auto& spec = schema.attributes[attr];
    if (spec.kind == AttributeKind::continuous) {
      std::vector<std::pair<double, int>> vl;
      vl.reserve(rows.size());
      for (Eigen::Index r : rows)
        vl.emplace_back(attr_values(r, attr), labels[static_cast<std::size_t>(r)]);
      std::sort(vl.begin(), vl.end());

      std::vector<long long> left(classes, 0);
      std::vector<long long> right = parent;
      for (long long i = 1; i < n; ++i) {
        const auto& prev = vl[static_cast<std::size_t>(i - 1)];
        ++left[prev.second];
        --right[prev.second];
        const auto& curr = vl[static_cast<std::size_t>(i)];
        if (curr.first <= prev.first) continue;  // not a distinct boundary
        const double threshold = 0.5 * (prev.first + curr.first);
        const double e =
            (static_cast<double>(i) / static_cast<double>(n)) * entropy_terms(left, i) +
            (static_cast<double>(n - i) / static_cast<double>(n)) * entropy_terms(right, n - i);
        const double g = parent_entropy - e;
        if (!best || g > best->gain) {
          best = SplitChoice{SplitTest{attr, true, threshold}, g};
        }
      }
    } else {
      const int levels = spec.kind == AttributeKind::binary
                             ? 2
                             : static_cast<int>(spec.levels.size());
      std::vector<std::vector<long long>> branch(
          static_cast<std::size_t>(levels), std::vector<long long>(classes, 0));
      std::vector<long long> branch_total(levels, 0);
      for (Eigen::Index r : rows) {
        const int lv = std::clamp(
            static_cast<int>(std::llround(attr_values(r, attr))), 0, levels - 1);
        ++branch[lv][labels[static_cast<std::size_t>(r)]];
        ++branch_total[lv];
      }
      double e = 0.0;
      int nonempty = 0;
      for (int lv = 0; lv < levels; ++lv) {
        if (branch_total[lv] == 0) continue;
        ++nonempty;
        e += (static_cast<double>(branch_total[lv]) / static_cast<double>(n)) *
             entropy_terms(branch[lv], branch_total[lv]);
      }
      if (nonempty < 2) continue;  // degenerate split
      const double g = parent_entropy - e;
      if (!best || g > best->gain) {
        best = SplitChoice{SplitTest{attr, false, 0.0}, g};
      }
    }
  }

  if (!best || best->gain < min_gain) return std::nullopt;
  return best;
}

namespace {

std::unique_ptr<TreeNode> grow(const Eigen::MatrixXd& vals, const std::vector<int>& labels,
                               const std::vector<Eigen::Index>& rows,
                               const std::vector<int>& candidates, const Schema& schema,
                               int classes, const TreeParams& params, int depth,
                               int parent_majority) {
  auto node = std::make_unique<TreeNode>();
  node->population = static_cast<long long>(rows.size());
  node->distribution.assign(classes, 0);
  for (Eigen::Index r : rows) ++node->distribution[labels[static_cast<std::size_t>(r)]];

  // majority label, ties to the lower interval
  node->label = parent_majority;
  long long best_count = -1;
  for (int k = 0; k < classes; ++k) {
    if (node->distribution[k] > best_count) {
      best_count = node->distribution[k];
      node->label = k;
    }
  }
  if (rows.empty()) {
    node->label = parent_majority;
    return node;
  }

  const bool pure = best_count == node->population;
  if (pure || node->population < params.min_leaf || depth >= params.max_depth)
    return node;

  auto choice = best_split(vals, labels, rows, candidates, schema, classes, params.min_gain);
  if (!choice) return node;

  node->test = choice->test;
  const auto& spec = schema.attributes[choice->test.attribute];
  if (choice->test.is_threshold) {
    std::vector<Eigen::Index> lo, hi;
    for (Eigen::Index r : rows) {
      if (vals(r, choice->test.attribute) <= choice->test.threshold)
        lo.push_back(r);
      else
        hi.push_back(r);
    }
    node->children.push_back(grow(vals, labels, lo, candidates, schema, classes, params,
                                  depth + 1, node->label));
    node->children.push_back(grow(vals, labels, hi, candidates, schema, classes, params,
                                  depth + 1, node->label));
  } else {
    const int levels = spec.kind == AttributeKind::binary
                           ? 2
                           : static_cast<int>(spec.levels.size());
    std::vector<std::vector<Eigen::Index>> parts(levels);
    for (Eigen::Index r : rows) {
      const int lv = std::clamp(
          static_cast<int>(std::llround(vals(r, choice->test.attribute))), 0, levels - 1);
      parts[lv].push_back(r);
    }
    for (int lv = 0; lv < levels; ++lv)
      node->children.push_back(grow(vals, labels, parts[lv], candidates, schema, classes,
                                    params, depth + 1, node->label));
  }
  return node;
}

}  // namespace

DecisionTree induce(const Dataset& train, const std::string& target, IntervalScheme scheme,
                    const TreeParams& params) {
  const int target_idx = train.schema.index_of(target);
  if (target_idx < 0) throw InputError("induce: unknown target attribute '" + target + "'");
  if (train.record_count() == 0) throw InputError("induce: empty training set");

  const Eigen::MatrixXd vals = attribute_values(train);
  std::vector<int> candidates;
  for (int a = 0; a < train.schema.attribute_count(); ++a)
    if (a != target_idx) candidates.push_back(a);

  std::vector<Eigen::Index> rows;
  std::vector<int> labels(static_cast<std::size_t>(train.record_count()), 0);
  for (Eigen::Index r = 0; r < train.record_count(); ++r) {
    if (!train.row_complete(r)) continue;  // induction uses complete records only
    labels[static_cast<std::size_t>(r)] = scheme.label_of(vals(r, target_idx));
    rows.push_back(r);
  }
  if (rows.empty()) throw InputError("induce: no complete training rows");

  DecisionTree tree;
  tree.target = target;
  tree.scheme = std::move(scheme);
  tree.root = grow(vals, labels, rows, candidates, train.schema, tree.scheme.classes,
                   params, 0, 0);
  return tree;
}

int predict_interval(const DecisionTree& tree,
                     std::span<const std::optional<double>> attrs) {
  const TreeNode* node = tree.root.get();
  while (!node->is_leaf()) {
    const SplitTest& test = *node->test;
    const auto& value = attrs[static_cast<std::size_t>(test.attribute)];
    const TreeNode* next = nullptr;
    if (!value.has_value()) {
      // untested attribute hole: follow the more populated branch
      long long best_pop = -1;
      for (const auto& child : node->children) {
        if (child->population > best_pop) {
          best_pop = child->population;
          next = child.get();
        }
      }
    } else if (test.is_threshold) {
      next = (*value <= test.threshold) ? node->children[0].get() : node->children[1].get();
    } else {
      const int lv = std::clamp(static_cast<int>(std::llround(*value)), 0,
                                static_cast<int>(node->children.size()) - 1);
      next = node->children[static_cast<std::size_t>(lv)].get();
    }
    node = next;
  }
  return node->label;
}

namespace {

void write_node(std::ostream& out, const TreeNode& node, const Schema& schema, int depth) {
  for (int i = 0; i < depth; ++i) out << "  ";
  if (node.is_leaf()) {
    out << "leaf " << node.label << " n=" << node.population << " dist";
    for (long long c : node.distribution) out << ' ' << c;
    out << '\n';
    return;
  }
  const auto& test = *node.test;
  out << "split " << schema.attributes[test.attribute].name;
  if (test.is_threshold)
    out << " <= " << fmt(test.threshold);
  else
    out << " level";
  out << " n=" << node.population << '\n';
  for (const auto& child : node.children) write_node(out, *child, schema, depth + 1);
}

struct NodeLine {
  int depth = 0;
  std::string body;
};

std::unique_ptr<TreeNode> parse_node(const std::vector<NodeLine>& lines, std::size_t& pos,
                                     int depth, const Schema& schema, int classes) {
  if (pos >= lines.size() || lines[pos].depth != depth)
    throw InputError("tree text: malformed node nesting");
  std::istringstream in(lines[pos].body);
  ++pos;
  auto node = std::make_unique<TreeNode>();
  std::string kind;
  in >> kind;
  if (kind == "leaf") {
    std::string n_tok, dist_tok;
    in >> node->label >> n_tok >> dist_tok;
    if (n_tok.rfind("n=", 0) != 0 || dist_tok != "dist")
      throw InputError("tree text: malformed leaf line");
    node->population = std::stoll(n_tok.substr(2));
    node->distribution.assign(classes, 0);
    for (int k = 0; k < classes; ++k) in >> node->distribution[k];
    return node;
  }
  if (kind != "split") throw InputError("tree text: unknown node kind '" + kind + "'");
  std::string attr_name, op;
  in >> attr_name >> op;
  const int attr = schema.index_of(attr_name);
  if (attr < 0) throw InputError("tree text: unknown attribute '" + attr_name + "'");
  SplitTest test;
  test.attribute = attr;
  std::string n_tok;
  int n_children = 0;
  if (op == "<=") {
    test.is_threshold = true;
    in >> test.threshold >> n_tok;
    n_children = 2;
  } else if (op == "level") {
    test.is_threshold = false;
    in >> n_tok;
    const auto& spec = schema.attributes[attr];
    n_children = spec.kind == AttributeKind::binary ? 2
                                                    : static_cast<int>(spec.levels.size());
  } else {
    throw InputError("tree text: unknown split form '" + op + "'");
  }
  if (n_tok.rfind("n=", 0) != 0) throw InputError("tree text: malformed split line");
  node->population = std::stoll(n_tok.substr(2));
  node->test = test;
  node->distribution.assign(classes, 0);
  for (int c = 0; c < n_children; ++c)
    node->children.push_back(parse_node(lines, pos, depth + 1, schema, classes));
  // recover aggregate info for prediction fallbacks
  for (const auto& child : node->children)
    for (int k = 0; k < classes; ++k) node->distribution[k] += child->distribution[k];
  long long best_count = -1;
  for (int k = 0; k < classes; ++k) {
    if (node->distribution[k] > best_count) {
      best_count = node->distribution[k];
      node->label = k;
    }
  }
  return node;
}

}  // namespace

std::string tree_to_text(const DecisionTree& tree, const Schema& schema) {
  std::ostringstream out;
  out << "dtree 1\n";
  out << "target " << tree.target << '\n';
  out << "classes " << tree.scheme.classes << '\n';
  if (tree.scheme.binned) {
    out << "scheme binned " << fmt(tree.scheme.bin_width);
    for (double e : tree.scheme.edges) out << ' ' << fmt(e);
    out << '\n';
  } else {
    out << "scheme levels\n";
  }
  write_node(out, *tree.root, schema, 0);
  return out.str();
}

DecisionTree tree_from_text(const std::string& text, const Schema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "dtree 1")
    throw InputError("tree text: bad magic line");

  DecisionTree tree;
  if (!std::getline(in, line) || line.rfind("target ", 0) != 0)
    throw InputError("tree text: missing target line");
  tree.target = line.substr(7);
  const int target_idx = schema.index_of(tree.target);
  if (target_idx < 0)
    throw InputError("tree text: target '" + tree.target + "' not in schema");

  if (!std::getline(in, line) || line.rfind("classes ", 0) != 0)
    throw InputError("tree text: missing classes line");
  const int classes = std::stoi(line.substr(8));

  if (!std::getline(in, line) || line.rfind("scheme ", 0) != 0)
    throw InputError("tree text: missing scheme line");
  {
    std::istringstream s(line.substr(7));
    std::string form;
    s >> form;
    tree.scheme.attribute = tree.target;
    tree.scheme.classes = classes;
    if (form == "binned") {
      tree.scheme.binned = true;
      s >> tree.scheme.bin_width;
      double e;
      while (s >> e) tree.scheme.edges.push_back(e);
      if (static_cast<int>(tree.scheme.edges.size()) != classes + 1)
        throw InputError("tree text: edge count does not match classes");
    } else if (form == "levels") {
      tree.scheme.binned = false;
    } else {
      throw InputError("tree text: unknown scheme form '" + form + "'");
    }
  }

  std::vector<NodeLine> lines;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::size_t indent = 0;
    while (indent < line.size() && line[indent] == ' ') ++indent;
    lines.push_back(NodeLine{static_cast<int>(indent / 2), line.substr(indent)});
  }
  if (lines.empty()) throw InputError("tree text: no nodes");
  std::size_t pos = 0;
  tree.root = parse_node(lines, pos, 0, schema, classes);
  if (pos != lines.size()) throw InputError("tree text: trailing node lines");
  return tree;
}

void save_tree(const DecisionTree& tree, const Schema& schema,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write tree file " + path.string());
  out << tree_to_text(tree, schema);
}

DecisionTree load_tree(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open tree file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return tree_from_text(buf.str(), schema);
}

}  // namespace impute
