#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imst/ingest.hpp"

namespace imst {

enum class Criterion { Gini, Entropy };

/// How a node's training error is measured for cost-complexity pruning.
/// Squared: sum of (y - c)^2 over label codes, c the node's dominant class.
/// Misclassification: number of rows not in the dominant class.
enum class LeafError { Squared, Misclassification };

using ClassCounts = std::array<std::size_t, kNumClasses>;

// ---------------------------------------------------------------------------
// Impurity

/// 1 - sum p_j^2. Throws DataError on an empty node.
double gini(std::span<const std::size_t> counts);
/// -sum p_j log2 p_j, with 0 log 0 = 0. Throws DataError on an empty node.
double entropy(std::span<const std::size_t> counts);
double impurity(std::span<const std::size_t> counts, Criterion criterion);

/// Size-weighted impurity of an r-way partition: sum |S_i|/|S| * I(S_i).
double split_cost(std::span<const std::vector<std::size_t>> partition, Criterion criterion);

// ---------------------------------------------------------------------------
// Features

enum class FeatureKind { Continuous, Categorical };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  /// Categorical codes are stored as integral doubles.
  std::vector<double> values;
};

/// Column-major feature matrix plus labels, the input to tree growth.
struct FeatureTable {
  std::vector<Feature> features;
  std::vector<int> labels;

  std::size_t rows() const { return labels.size(); }
  FeatureTable subset(std::span<const std::size_t> rows) const;
  std::vector<double> row(std::size_t i) const;
};

/// Looks each name up among the latent and numeric columns (continuous) and
/// the categorical columns. Throws ConfigError for unknown names.
FeatureTable make_feature_table(const MixedDataset& ds, const std::vector<std::string>& names);

/// Latent columns, then the binned projection column, then the categoricals.
std::vector<std::string> imst_feature_names(const MixedDataset& ds, const std::string& binned_name);
/// Raw numeric columns, categoricals, then latent columns.
std::vector<std::string> baseline_feature_names(const MixedDataset& ds);

// ---------------------------------------------------------------------------
// Splits

struct SplitRule {
  enum class Kind { Threshold, Categorical };

  Kind kind = Kind::Threshold;
  int feature = -1;
  /// Threshold splits: left child takes value <= cutpoint.
  double cutpoint = 0.0;
  /// Categorical splits: child i takes code codes[i]; ascending.
  std::vector<int> codes;
};

struct SplitCandidate {
  SplitRule rule;
  double cost = 0.0;
};

/// Lowest-cost split of the given rows. Continuous features are cut at the
/// midpoints of consecutive distinct values; categorical features split one
/// branch per observed code. Ties go to the lowest feature index, then the
/// lowest cutpoint. Returns nothing when no candidate exists or the impurity
/// reduction is below min_gain.
std::optional<SplitCandidate> best_split(const FeatureTable& data,
                                         std::span<const std::size_t> rows,
                                         Criterion criterion, double min_gain = 0.0);

// ---------------------------------------------------------------------------
// Trees

struct TreeNode {
  ClassCounts counts{};
  std::size_t n = 0;
  /// Dominant class code (ties to the lowest code).
  int label = 0;
  int depth = 0;
  int parent = -1;
  /// Node id in the unpruned tree this node descends from.
  int origin = -1;
  std::optional<SplitRule> rule;
  std::vector<int> children;
  /// Child that received the most training rows; unseen codes route here.
  int majority_branch = 0;

  bool is_leaf() const { return children.empty(); }
};

struct PruneStep {
  double alpha = 0.0;
  std::size_t leaves = 0;
};

struct SegTree {
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> feature_kinds;
  /// nodes[0] is the root; children always have larger ids than parents.
  std::vector<TreeNode> nodes;
  Criterion criterion = Criterion::Gini;
  LeafError leaf_error = LeafError::Squared;
  double prune_alpha = 0.0;
  std::vector<PruneStep> prune_sequence;

  std::size_t leaf_count() const;
  int depth() const;
};

struct GrowConfig {
  Criterion criterion = Criterion::Gini;
  /// Nodes with fewer rows are not split.
  int min_node_size = 5;
  double min_gain = 1e-6;
  int max_depth = 12;
  int cv_folds = 10;
  std::uint64_t seed = 0;
  LeafError leaf_error = LeafError::Squared;

  void validate() const;
};

/// Grows the unpruned tree: a node is split while it is impure, has at least
/// min_node_size rows, is shallower than max_depth and has an admissible split.
SegTree grow(const FeatureTable& data, const GrowConfig& cfg);
SegTree grow(const MixedDataset& ds, const std::vector<std::string>& features,
             const GrowConfig& cfg);

/// Mean leaf error Q_m of a node under its dominant-class prediction.
double node_error(const TreeNode& node, LeafError mode = LeafError::Squared);
/// Mean squared deviation of the label codes from `prediction`.
double node_error(std::span<const int> labels, int prediction);

/// N_m * Q_m for a node.
double node_cost(const TreeNode& node, LeafError mode);

struct PrunedSubtree {
  double alpha = 0.0;
  SegTree tree;
};

/// Weakest-link sequence. Entry 0 is the smallest subtree minimizing
/// C_0 (alpha = 0); each later entry collapses every internal node whose
/// per-leaf error increase equals the current minimum, down to the root.
/// alphas are non-decreasing and subtrees nested.
std::vector<PrunedSubtree> prune_path(const SegTree& tree);

/// Smallest subtree minimizing C_alpha: the last path entry with alpha_k <= alpha.
SegTree prune_to(const SegTree& tree, double alpha);

struct AlphaSelection {
  double alpha = 0.0;
  std::vector<double> grid;
  std::vector<double> cv_error;
};

/// k-fold CV over the geometric midpoints of the full tree's pruning
/// breakpoints. Ties go to the larger alpha.
AlphaSelection select_alpha(const SegTree& full_tree, const FeatureTable& data,
                            const GrowConfig& cfg);

/// grow + select_alpha + prune_to.
SegTree train_tree(const FeatureTable& data, const GrowConfig& cfg);

/// Univariate-split baseline over raw numeric, categorical and latent columns.
SegTree baseline_grow(const MixedDataset& ds, const GrowConfig& cfg);

struct Prediction {
  int label = 0;
  /// Leaf class proportions in code order (-1, 0, 1).
  std::array<double, kNumClasses> proportions{};
};

/// Routes a row (aligned with tree.feature_names) to a leaf.
Prediction predict(const SegTree& tree, std::span<const double> row);
/// Predicts every row of a table, matching features by name.
std::vector<Prediction> predict(const SegTree& tree, const FeatureTable& data);

nlohmann::json to_json(const SegTree& tree);
SegTree tree_from_json(const nlohmann::json& j);
/// Indented rule listing.
std::string format_rules(const SegTree& tree);

std::string to_string(Criterion c);
Criterion parse_criterion(const std::string& s);
std::string to_string(LeafError e);
LeafError parse_leaf_error(const std::string& s);

}  // namespace imst
