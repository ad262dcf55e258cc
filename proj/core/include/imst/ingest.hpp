#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace imst {

// ---------------------------------------------------------------------------
// Class labels
// ---------------------------------------------------------------------------

/// Attention levels: -1 less, 0 normal, 1 more.
inline constexpr std::array<int, 3> kClassCodes{-1, 0, 1};
inline constexpr std::size_t kNumClasses = kClassCodes.size();

/// Maps a label code in {-1, 0, 1} to 0..2. Throws DataError otherwise.
std::size_t class_index(int code);

// ---------------------------------------------------------------------------
// Tabular data
// ---------------------------------------------------------------------------

enum class ColumnRole { Numeric, Categorical, Label, Id };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::Numeric;
  /// Allowed codes for a categorical column. Empty means "whatever is observed".
  std::vector<int> codes;
};

/// Column-role declaration for a CSV file.
///
/// JSON form:
///   {"columns": {"id": "id", "CA": "numeric", "label": "label",
///                "Industry": {"role": "categorical", "codes": [1, 2, 3]}}}
struct Schema {
  std::vector<ColumnSpec> columns;

  static Schema from_json(const nlohmann::json& j);
  static Schema load(const std::filesystem::path& path);

  const ColumnSpec* find(const std::string& name) const;
};

struct NumericColumn {
  std::string name;
  std::vector<double> values;
};

struct CategoricalColumn {
  std::string name;
  std::vector<int> codes;
  /// Sorted, unique.
  std::vector<int> code_set;
};

/// Row-aligned numeric, categorical, latent and label columns.
struct MixedDataset {
  std::vector<std::string> row_ids;
  std::vector<int> labels;
  std::vector<NumericColumn> numeric;
  std::vector<CategoricalColumn> categorical;
  std::vector<NumericColumn> latent;

  std::size_t size() const { return labels.size(); }

  /// Throws DataError if any invariant is broken.
  void validate() const;

  const NumericColumn* find_numeric(const std::string& name) const;
  const NumericColumn* find_latent(const std::string& name) const;
  const CategoricalColumn* find_categorical(const std::string& name) const;

  std::vector<std::string> numeric_names() const;
  std::vector<std::string> categorical_names() const;
  std::vector<std::string> latent_names() const;

  /// n x p matrix of the numeric columns, in column order.
  Eigen::MatrixXd numeric_matrix() const;

  /// Rows in the given order. Code sets are kept, not re-derived.
  MixedDataset subset(std::span<const std::size_t> rows) const;
};

MixedDataset parse_tabular(std::istream& in, const Schema& schema);
MixedDataset load_tabular(const std::filesystem::path& path, const Schema& schema);

// ---------------------------------------------------------------------------
// Text
// ---------------------------------------------------------------------------

struct TokenCorpus {
  std::vector<std::string> doc_ids;
  std::vector<std::vector<std::string>> docs;

  std::size_t size() const { return docs.size(); }
};

/// One document per line: id, then tab-separated tokens.
TokenCorpus parse_documents(std::istream& in);
TokenCorpus load_documents(const std::filesystem::path& path);

/// Reorders the corpus to follow the dataset's row ids. Every row needs a
/// document and every document a row.
TokenCorpus align_corpus(const TokenCorpus& corpus, const MixedDataset& ds);

struct DocumentTermMatrix {
  /// n x d term counts (integral values stored as double).
  Eigen::MatrixXd counts;
  std::vector<std::string> lexicon;

  Eigen::Index rows() const { return counts.rows(); }
  Eigen::Index cols() const { return counts.cols(); }
};

/// Lexicon = terms with corpus frequency >= min_count, ordered by descending
/// frequency with lexicographic tie-break.
DocumentTermMatrix build_dtm(const TokenCorpus& corpus, int min_count = 1);

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

struct NumericSummary {
  std::string name;
  double mean = 0.0;
  /// Sample (n - 1) standard deviation.
  double sd = 0.0;
  /// 100 * sd / mean; absent when the mean is 0.
  std::optional<double> cv;
  bool zero_variance = false;
};

struct CategoryFrequency {
  int code = 0;
  std::size_t count = 0;
  double percent = 0.0;
};

struct CategoricalSummary {
  std::string name;
  std::vector<CategoryFrequency> levels;
};

struct StatsReport {
  std::size_t rows = 0;
  std::vector<NumericSummary> numeric;
  std::vector<CategoricalSummary> categorical;
};

StatsReport summarize(const MixedDataset& ds);

nlohmann::json to_json(const StatsReport& report);
std::string format_text(const StatsReport& report);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

/// Pearson correlations between the numeric columns.
CorrelationMatrix correlation_matrix(const MixedDataset& ds);

std::string to_csv(const CorrelationMatrix& corr);

}  // namespace imst
