#include "imst/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "imst/error.hpp"
#include "imst/random.hpp"
#include "text_util.hpp"

namespace imst {

namespace {

// Split costs closer than this are treated as ties.
constexpr double kCostTieTol = 1e-13;
// Pruning breakpoints closer than this (relative) are treated as equal.
constexpr double kAlphaTol = 1e-9;

std::size_t total_of(std::span<const std::size_t> counts) {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

int dominant_class(const ClassCounts& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return kClassCodes[best];
}

ClassCounts count_labels(const std::vector<int>& labels, std::span<const std::size_t> rows) {
  ClassCounts counts{};
  for (std::size_t r : rows) ++counts[class_index(labels[r])];
  return counts;
}

double weighted_cost(std::span<const ClassCounts> parts, std::size_t total, Criterion criterion) {
  double cost = 0.0;
  for (const auto& part : parts) {
    const std::size_t n = total_of(part);
    cost += static_cast<double>(n) / static_cast<double>(total) * impurity(part, criterion);
  }
  return cost;
}

TreeNode make_node(const ClassCounts& counts, int depth, int parent) {
  TreeNode node;
  node.counts = counts;
  node.n = total_of(counts);
  node.label = dominant_class(counts);
  node.depth = depth;
  node.parent = parent;
  return node;
}

bool is_pure(const ClassCounts& counts) {
  return std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
}

std::size_t route(const SplitRule& rule, double value, int majority_branch) {
  if (rule.kind == SplitRule::Kind::Threshold) return value <= rule.cutpoint ? 0 : 1;
  const int code = static_cast<int>(value);
  auto it = std::lower_bound(rule.codes.begin(), rule.codes.end(), code);
  if (it == rule.codes.end() || *it != code) return static_cast<std::size_t>(majority_branch);
  return static_cast<std::size_t>(it - rule.codes.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Impurity

double gini(std::span<const std::size_t> counts) {
  const std::size_t total = total_of(counts);
  if (total == 0) throw DataError("impurity of an empty node");
  // (N^2 - sum c^2) / N^2 in integers, so the only rounding is the final division.
  std::uint64_t sum_sq = 0;
  for (std::size_t c : counts) sum_sq += static_cast<std::uint64_t>(c) * c;
  const auto total_sq = static_cast<std::uint64_t>(total) * total;
  return static_cast<double>(total_sq - sum_sq) / static_cast<double>(total_sq);
}

double entropy(std::span<const std::size_t> counts) {
  const std::size_t total = total_of(counts);
  if (total == 0) throw DataError("impurity of an empty node");
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double impurity(std::span<const std::size_t> counts, Criterion criterion) {
  return criterion == Criterion::Gini ? gini(counts) : entropy(counts);
}

double split_cost(std::span<const std::vector<std::size_t>> partition, Criterion criterion) {
  std::size_t total = 0;
  for (const auto& part : partition) {
    const std::size_t n = total_of(part);
    if (n == 0) throw DataError("split_cost: empty part");
    total += n;
  }
  if (total == 0) throw DataError("split_cost: empty partition");
  double cost = 0.0;
  for (const auto& part : partition) {
    cost += static_cast<double>(total_of(part)) / static_cast<double>(total) *
            impurity(part, criterion);
  }
  return cost;
}

// ---------------------------------------------------------------------------
// Features

FeatureTable FeatureTable::subset(std::span<const std::size_t> rows) const {
  FeatureTable out;
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels.at(r));
  for (const auto& f : features) {
    Feature g{f.name, f.kind, {}};
    g.values.reserve(rows.size());
    for (std::size_t r : rows) g.values.push_back(f.values.at(r));
    out.features.push_back(std::move(g));
  }
  return out;
}

std::vector<double> FeatureTable::row(std::size_t i) const {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.values.at(i));
  return out;
}

FeatureTable make_feature_table(const MixedDataset& ds, const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("tree: feature list is empty");
  FeatureTable table;
  table.labels = ds.labels;
  for (const auto& name : names) {
    if (const auto* col = ds.find_latent(name)) {
      table.features.push_back({name, FeatureKind::Continuous, col->values});
    } else if (const auto* num = ds.find_numeric(name)) {
      table.features.push_back({name, FeatureKind::Continuous, num->values});
    } else if (const auto* cat = ds.find_categorical(name)) {
      Feature f{name, FeatureKind::Categorical, {}};
      f.values.assign(cat->codes.begin(), cat->codes.end());
      table.features.push_back(std::move(f));
    } else {
      throw ConfigError("tree: feature '" + name + "' is not a column of the dataset");
    }
  }
  return table;
}

std::vector<std::string> imst_feature_names(const MixedDataset& ds, const std::string& binned_name) {
  std::vector<std::string> names = ds.latent_names();
  names.push_back(binned_name);
  for (const auto& c : ds.categorical) {
    if (c.name != binned_name) names.push_back(c.name);
  }
  return names;
}

std::vector<std::string> baseline_feature_names(const MixedDataset& ds) {
  std::vector<std::string> names = ds.numeric_names();
  for (const auto& n : ds.categorical_names()) names.push_back(n);
  for (const auto& n : ds.latent_names()) names.push_back(n);
  return names;
}

// ---------------------------------------------------------------------------
// Split search

std::optional<SplitCandidate> best_split(const FeatureTable& data,
                                         std::span<const std::size_t> rows,
                                         Criterion criterion, double min_gain) {
  if (rows.size() < 2) return std::nullopt;
  const ClassCounts parent = count_labels(data.labels, rows);
  const double parent_impurity = impurity(parent, criterion);
  const std::size_t n = rows.size();

  std::optional<SplitCandidate> best;
  const auto consider = [&](SplitRule rule, double cost) {
    if (!best || cost < best->cost - kCostTieTol) best = SplitCandidate{std::move(rule), cost};
  };

  std::vector<std::pair<double, std::size_t>> sorted;  // (value, class index)
  sorted.reserve(n);
  for (std::size_t f = 0; f < data.features.size(); ++f) {
    const auto& feature = data.features[f];
    if (feature.kind == FeatureKind::Continuous) {
      sorted.clear();
      for (std::size_t r : rows) {
        sorted.emplace_back(feature.values[r], class_index(data.labels[r]));
      }
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      ClassCounts left{};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[sorted[i].second];
        const double lo = sorted[i].first;
        const double hi = sorted[i + 1].first;
        if (!(lo < hi)) continue;
        const double cut = lo + (hi - lo) / 2.0;
        if (!(lo < cut && cut < hi)) continue;
        ClassCounts right{};
        for (std::size_t c = 0; c < kNumClasses; ++c) right[c] = parent[c] - left[c];
        const std::array<ClassCounts, 2> parts{left, right};
        SplitRule rule;
        rule.kind = SplitRule::Kind::Threshold;
        rule.feature = static_cast<int>(f);
        rule.cutpoint = cut;
        consider(std::move(rule), weighted_cost(parts, n, criterion));
      }
    } else {
      std::map<int, ClassCounts> by_code;
      for (std::size_t r : rows) {
        ++by_code[static_cast<int>(feature.values[r])][class_index(data.labels[r])];
      }
      if (by_code.size() < 2) continue;
      SplitRule rule;
      rule.kind = SplitRule::Kind::Categorical;
      rule.feature = static_cast<int>(f);
      std::vector<ClassCounts> parts;
      for (const auto& [code, counts] : by_code) {
        rule.codes.push_back(code);
        parts.push_back(counts);
      }
      consider(std::move(rule), weighted_cost(parts, n, criterion));
    }
  }
  if (best && parent_impurity - best->cost < min_gain) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Growth

std::size_t SegTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int SegTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

void GrowConfig::validate() const {
  if (min_node_size < 1) throw ConfigError("tree.min_node_size must be at least 1");
  if (!(min_gain >= 0.0)) throw ConfigError("tree.min_gain must be non-negative");
  if (max_depth < 0) throw ConfigError("tree.max_depth must be non-negative");
  if (cv_folds < 2) throw ConfigError("tree.cv_folds must be at least 2");
}

SegTree grow(const FeatureTable& data, const GrowConfig& cfg) {
  cfg.validate();
  if (data.rows() == 0) throw DataError("grow: dataset is empty");
  if (data.features.empty()) throw ConfigError("grow: no features");
  for (const auto& f : data.features) {
    if (f.values.size() != data.rows()) throw DataError("grow: feature '" + f.name + "' has wrong length");
  }

  SegTree tree;
  tree.criterion = cfg.criterion;
  tree.leaf_error = cfg.leaf_error;
  for (const auto& f : data.features) {
    tree.feature_names.push_back(f.name);
    tree.feature_kinds.push_back(f.kind);
  }

  const std::size_t min_rows = std::max<std::size_t>(2, static_cast<std::size_t>(cfg.min_node_size));
  std::function<int(std::vector<std::size_t>, int, int)> build =
      [&](std::vector<std::size_t> rows, int depth, int parent) -> int {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(make_node(count_labels(data.labels, rows), depth, parent));
    tree.nodes[static_cast<std::size_t>(id)].origin = id;
    const ClassCounts counts = tree.nodes[static_cast<std::size_t>(id)].counts;
    if (is_pure(counts) || rows.size() < min_rows || depth >= cfg.max_depth) return id;

    auto split = best_split(data, rows, cfg.criterion, cfg.min_gain);
    if (!split) return id;

    const auto& feature = data.features[static_cast<std::size_t>(split->rule.feature)];
    const std::size_t branches =
        split->rule.kind == SplitRule::Kind::Threshold ? 2 : split->rule.codes.size();
    std::vector<std::vector<std::size_t>> parts(branches);
    for (std::size_t r : rows) parts[route(split->rule, feature.values[r], 0)].push_back(r);

    std::size_t majority = 0;
    for (std::size_t b = 1; b < branches; ++b) {
      if (parts[b].size() > parts[majority].size()) majority = b;
    }
    tree.nodes[static_cast<std::size_t>(id)].rule = split->rule;
    tree.nodes[static_cast<std::size_t>(id)].majority_branch = static_cast<int>(majority);
    for (auto& part : parts) {
      const int child = build(std::move(part), depth + 1, id);
      tree.nodes[static_cast<std::size_t>(id)].children.push_back(child);
    }
    return id;
  };

  std::vector<std::size_t> all(data.rows());
  std::iota(all.begin(), all.end(), 0);
  build(std::move(all), 0, -1);
  tree.prune_sequence = {{0.0, tree.leaf_count()}};
  return tree;
}

SegTree grow(const MixedDataset& ds, const std::vector<std::string>& features,
             const GrowConfig& cfg) {
  return grow(make_feature_table(ds, features), cfg);
}

// ---------------------------------------------------------------------------
// Leaf error

double node_cost(const TreeNode& node, LeafError mode) {
  const std::size_t predicted = class_index(node.label);
  double cost = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (mode == LeafError::Squared) {
      const double d = static_cast<double>(kClassCodes[c] - node.label);
      cost += static_cast<double>(node.counts[c]) * d * d;
    } else if (c != predicted) {
      cost += static_cast<double>(node.counts[c]);
    }
  }
  return cost;
}

double node_error(const TreeNode& node, LeafError mode) {
  if (node.n == 0) throw DataError("node_error: empty node");
  return node_cost(node, mode) / static_cast<double>(node.n);
}

double node_error(std::span<const int> labels, int prediction) {
  if (labels.empty()) throw DataError("node_error: empty node");
  double s = 0.0;
  for (int y : labels) s += static_cast<double>(y - prediction) * static_cast<double>(y - prediction);
  return s / static_cast<double>(labels.size());
}

// ---------------------------------------------------------------------------
// Pruning

namespace {

/// Copies the part of `tree` that survives when every node flagged in
/// `collapsed` is turned into a leaf.
SegTree materialize(const SegTree& tree, const std::vector<bool>& collapsed) {
  SegTree out;
  out.feature_names = tree.feature_names;
  out.feature_kinds = tree.feature_kinds;
  out.criterion = tree.criterion;
  out.leaf_error = tree.leaf_error;
  std::function<int(int, int)> copy = [&](int src, int parent) -> int {
    const int id = static_cast<int>(out.nodes.size());
    TreeNode node = tree.nodes[static_cast<std::size_t>(src)];
    node.parent = parent;
    node.children.clear();
    const bool keep_split = !node.rule ? false : !collapsed[static_cast<std::size_t>(src)];
    if (!keep_split) {
      node.rule.reset();
      node.majority_branch = 0;
    }
    out.nodes.push_back(std::move(node));
    if (keep_split) {
      for (int child : tree.nodes[static_cast<std::size_t>(src)].children) {
        const int c = copy(child, id);
        out.nodes[static_cast<std::size_t>(id)].children.push_back(c);
      }
    }
    return id;
  };
  copy(0, -1);
  return out;
}

struct SubtreeStats {
  std::vector<double> error;      // R(T_t) under the current collapse state
  std::vector<std::size_t> leaves;
  std::vector<bool> active;       // not below a collapsed node
};

SubtreeStats subtree_stats(const SegTree& tree, const std::vector<double>& own_cost,
                           const std::vector<bool>& collapsed) {
  const std::size_t m = tree.nodes.size();
  SubtreeStats s{std::vector<double>(m), std::vector<std::size_t>(m), std::vector<bool>(m, false)};
  for (std::size_t i = m; i-- > 0;) {
    const auto& node = tree.nodes[i];
    if (node.is_leaf() || collapsed[i]) {
      s.error[i] = own_cost[i];
      s.leaves[i] = 1;
    } else {
      s.error[i] = 0.0;
      s.leaves[i] = 0;
      for (int c : node.children) {
        s.error[i] += s.error[static_cast<std::size_t>(c)];
        s.leaves[i] += s.leaves[static_cast<std::size_t>(c)];
      }
    }
  }
  s.active[0] = true;
  for (std::size_t i = 0; i < m; ++i) {
    for (int c : tree.nodes[i].children) {
      s.active[static_cast<std::size_t>(c)] = s.active[i] && !collapsed[i];
    }
  }
  return s;
}

}  // namespace

std::vector<PrunedSubtree> prune_path(const SegTree& tree) {
  if (tree.nodes.empty()) throw DataError("prune_path: empty tree");
  const std::size_t m = tree.nodes.size();
  std::vector<double> own_cost(m);
  for (std::size_t i = 0; i < m; ++i) own_cost[i] = node_cost(tree.nodes[i], tree.leaf_error);

  std::vector<bool> collapsed(m, false);
  const auto tol = [](double a) { return kAlphaTol * (1.0 + std::abs(a)); };

  // alpha = 0: collapse, bottom-up, every node whose branch does not lower the error.
  {
    std::vector<double> sub(m);
    for (std::size_t i = m; i-- > 0;) {
      const auto& node = tree.nodes[i];
      if (node.is_leaf()) {
        sub[i] = own_cost[i];
        continue;
      }
      double s = 0.0;
      for (int c : node.children) s += sub[static_cast<std::size_t>(c)];
      if (own_cost[i] <= s + tol(s)) {
        collapsed[i] = true;
        sub[i] = own_cost[i];
      } else {
        sub[i] = s;
      }
    }
  }

  std::vector<PrunedSubtree> path;
  path.push_back({0.0, materialize(tree, collapsed)});

  double alpha = 0.0;
  const auto internal_active = [&](const SubtreeStats& s, std::size_t i) {
    return s.active[i] && !tree.nodes[i].is_leaf() && !collapsed[i];
  };
  while (!tree.nodes[0].is_leaf() && !collapsed[0]) {
    auto stats = subtree_stats(tree, own_cost, collapsed);
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (!internal_active(stats, i)) continue;
      const double g = (own_cost[i] - stats.error[i]) / static_cast<double>(stats.leaves[i] - 1);
      g_min = std::min(g_min, g);
    }
    alpha = std::max(alpha, g_min);
    bool changed = true;
    while (changed) {
      changed = false;
      stats = subtree_stats(tree, own_cost, collapsed);
      for (std::size_t i = 0; i < m; ++i) {
        if (!internal_active(stats, i)) continue;
        const double g = (own_cost[i] - stats.error[i]) / static_cast<double>(stats.leaves[i] - 1);
        if (g <= alpha + tol(alpha)) {
          collapsed[i] = true;
          changed = true;
        }
      }
    }
    path.push_back({alpha, materialize(tree, collapsed)});
  }
  return path;
}

SegTree prune_to(const SegTree& tree, double alpha) {
  auto path = prune_path(tree);
  std::size_t pick = 0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path[k].alpha <= alpha + kAlphaTol * (1.0 + std::abs(alpha))) pick = k;
  }
  SegTree out = std::move(path[pick].tree);
  out.prune_alpha = alpha;
  out.prune_sequence.clear();
  for (const auto& step : path) out.prune_sequence.push_back({step.alpha, step.tree.leaf_count()});
  return out;
}

AlphaSelection select_alpha(const SegTree& full_tree, const FeatureTable& data,
                            const GrowConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.rows();
  const auto folds = static_cast<std::size_t>(cfg.cv_folds);
  if (n < folds) {
    throw DataError("select_alpha: " + std::to_string(n) + " rows is fewer than " +
                    std::to_string(folds) + " folds");
  }

  AlphaSelection sel;
  const auto full_path = prune_path(full_tree);
  for (std::size_t k = 0; k + 1 < full_path.size(); ++k) {
    sel.grid.push_back(std::sqrt(full_path[k].alpha * full_path[k + 1].alpha));
  }
  sel.grid.push_back(full_path.back().alpha);
  sel.cv_error.assign(sel.grid.size(), 0.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = i % folds;

  for (std::size_t fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == fold ? test : train).push_back(i);
    const FeatureTable train_data = data.subset(train);
    const FeatureTable test_data = data.subset(test);
    const auto fold_path = prune_path(grow(train_data, cfg));
    std::size_t k = 0;
    for (std::size_t g = 0; g < sel.grid.size(); ++g) {
      while (k + 1 < fold_path.size() &&
             fold_path[k + 1].alpha <= sel.grid[g] + kAlphaTol * (1.0 + sel.grid[g])) {
        ++k;
      }
      const auto preds = predict(fold_path[k].tree, test_data);
      double err = 0.0;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const int d = test_data.labels[i] - preds[i].label;
        err += cfg.leaf_error == LeafError::Squared ? static_cast<double>(d * d) : (d != 0 ? 1.0 : 0.0);
      }
      sel.cv_error[g] += err;
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < sel.grid.size(); ++g) {
    if (sel.cv_error[g] <= sel.cv_error[best]) best = g;
  }
  sel.alpha = sel.grid[best];
  return sel;
}

SegTree train_tree(const FeatureTable& data, const GrowConfig& cfg) {
  const SegTree full = grow(data, cfg);
  const auto sel = select_alpha(full, data, cfg);
  return prune_to(full, sel.alpha);
}

SegTree baseline_grow(const MixedDataset& ds, const GrowConfig& cfg) {
  return train_tree(make_feature_table(ds, baseline_feature_names(ds)), cfg);
}

// ---------------------------------------------------------------------------
// Prediction

Prediction predict(const SegTree& tree, std::span<const double> row) {
  if (row.size() != tree.feature_names.size()) {
    throw DataError("predict: row has " + std::to_string(row.size()) + " values, tree uses " +
                    std::to_string(tree.feature_names.size()) + " features");
  }
  std::size_t id = 0;
  while (!tree.nodes[id].is_leaf()) {
    const auto& node = tree.nodes[id];
    const auto f = static_cast<std::size_t>(node.rule->feature);
    const double value = row[f];
    if (std::isnan(value)) throw DataError("predict: missing value for feature '" + tree.feature_names[f] + "'");
    id = static_cast<std::size_t>(node.children[route(*node.rule, value, node.majority_branch)]);
  }
  const auto& leaf = tree.nodes[id];
  Prediction p;
  p.label = leaf.label;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p.proportions[c] = static_cast<double>(leaf.counts[c]) / static_cast<double>(leaf.n);
  }
  return p;
}

std::vector<Prediction> predict(const SegTree& tree, const FeatureTable& data) {
  std::vector<std::size_t> column;
  for (const auto& name : tree.feature_names) {
    auto it = std::find_if(data.features.begin(), data.features.end(),
                           [&](const Feature& f) { return f.name == name; });
    if (it == data.features.end()) throw DataError("predict: data lacks feature '" + name + "'");
    column.push_back(static_cast<std::size_t>(it - data.features.begin()));
  }
  std::vector<Prediction> out;
  out.reserve(data.rows());
  std::vector<double> row(column.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < column.size(); ++j) row[j] = data.features[column[j]].values[i];
    out.push_back(predict(tree, row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_string(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }

Criterion parse_criterion(const std::string& s) {
  if (s == "gini") return Criterion::Gini;
  if (s == "entropy") return Criterion::Entropy;
  throw ConfigError("criterion must be \"gini\" or \"entropy\", got \"" + s + "\"");
}

std::string to_string(LeafError e) { return e == LeafError::Squared ? "squared" : "misclassification"; }

LeafError parse_leaf_error(const std::string& s) {
  if (s == "squared") return LeafError::Squared;
  if (s == "misclassification") return LeafError::Misclassification;
  throw ConfigError("leaf_error must be \"squared\" or \"misclassification\", got \"" + s + "\"");
}

nlohmann::json to_json(const SegTree& tree) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t f = 0; f < tree.feature_names.size(); ++f) {
    features.push_back({{"name", tree.feature_names[f]},
                        {"kind", tree.feature_kinds[f] == FeatureKind::Continuous ? "continuous"
                                                                                  : "categorical"}});
  }
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    nlohmann::json j{{"id", i},
                     {"origin", node.origin},
                     {"parent", node.parent},
                     {"depth", node.depth},
                     {"n", node.n},
                     {"counts", node.counts},
                     {"label", node.label},
                     {"children", node.children}};
    if (node.rule) {
      nlohmann::json rule{{"feature", tree.feature_names[static_cast<std::size_t>(node.rule->feature)]},
                          {"feature_index", node.rule->feature}};
      if (node.rule->kind == SplitRule::Kind::Threshold) {
        rule["kind"] = "threshold";
        rule["cutpoint"] = node.rule->cutpoint;
      } else {
        rule["kind"] = "categorical";
        rule["codes"] = node.rule->codes;
      }
      j["rule"] = rule;
      j["majority_branch"] = node.majority_branch;
    }
    nodes.push_back(std::move(j));
  }
  nlohmann::json seq = nlohmann::json::array();
  for (const auto& s : tree.prune_sequence) seq.push_back({{"alpha", s.alpha}, {"leaves", s.leaves}});
  return {{"criterion", to_string(tree.criterion)},
          {"leaf_error", to_string(tree.leaf_error)},
          {"features", features},
          {"leaves", tree.leaf_count()},
          {"depth", tree.depth()},
          {"prune_alpha", tree.prune_alpha},
          {"prune_sequence", seq},
          {"nodes", nodes}};
}

SegTree tree_from_json(const nlohmann::json& j) {
  SegTree tree;
  tree.criterion = parse_criterion(j.at("criterion").get<std::string>());
  tree.leaf_error = parse_leaf_error(j.at("leaf_error").get<std::string>());
  for (const auto& f : j.at("features")) {
    tree.feature_names.push_back(f.at("name").get<std::string>());
    tree.feature_kinds.push_back(f.at("kind").get<std::string>() == "continuous"
                                     ? FeatureKind::Continuous
                                     : FeatureKind::Categorical);
  }
  tree.prune_alpha = j.at("prune_alpha").get<double>();
  for (const auto& s : j.at("prune_sequence")) {
    tree.prune_sequence.push_back({s.at("alpha").get<double>(), s.at("leaves").get<std::size_t>()});
  }
  for (const auto& jn : j.at("nodes")) {
    TreeNode node;
    node.origin = jn.at("origin").get<int>();
    node.parent = jn.at("parent").get<int>();
    node.depth = jn.at("depth").get<int>();
    node.n = jn.at("n").get<std::size_t>();
    node.counts = jn.at("counts").get<ClassCounts>();
    node.label = jn.at("label").get<int>();
    node.children = jn.at("children").get<std::vector<int>>();
    if (jn.contains("rule")) {
      const auto& jr = jn["rule"];
      SplitRule rule;
      rule.feature = jr.at("feature_index").get<int>();
      if (jr.at("kind").get<std::string>() == "threshold") {
        rule.kind = SplitRule::Kind::Threshold;
        rule.cutpoint = jr.at("cutpoint").get<double>();
      } else {
        rule.kind = SplitRule::Kind::Categorical;
        rule.codes = jr.at("codes").get<std::vector<int>>();
      }
      node.rule = std::move(rule);
      node.majority_branch = jn.at("majority_branch").get<int>();
    }
    tree.nodes.push_back(std::move(node));
  }
  if (tree.nodes.empty()) throw DataError("tree JSON has no nodes");
  return tree;
}

std::string format_rules(const SegTree& tree) {
  std::ostringstream out;
  const auto describe = [&](const TreeNode& node) {
    std::ostringstream s;
    s << "n=" << node.n << " [-1:" << node.counts[0] << " 0:" << node.counts[1]
      << " 1:" << node.counts[2] << "]";
    if (node.is_leaf()) s << " => " << node.label;
    return s.str();
  };
  std::function<void(int, int)> walk = [&](int id, int indent) {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    if (!node.is_leaf()) {
      const auto& rule = *node.rule;
      const auto& name = tree.feature_names[static_cast<std::size_t>(rule.feature)];
      for (std::size_t b = 0; b < node.children.size(); ++b) {
        const auto& child = tree.nodes[static_cast<std::size_t>(node.children[b])];
        out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
        if (rule.kind == SplitRule::Kind::Threshold) {
          out << name << (b == 0 ? " <= " : " > ") << detail::fmt_fixed(rule.cutpoint, 6);
        } else {
          out << name << " = " << rule.codes[b];
        }
        out << "  " << describe(child) << "\n";
        walk(node.children[b], indent + 1);
      }
    }
  };
  out << "root  " << describe(tree.nodes[0]) << "\n";
  walk(0, 1);
  out << "leaves: " << tree.leaf_count() << "  depth: " << tree.depth()
      << "  alpha: " << detail::fmt_exact(tree.prune_alpha) << "\n";
  return out.str();
}

}  // namespace imst
