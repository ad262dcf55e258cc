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

struct HoldoutSplit {
  /// Row indices, ascending.
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split: the test set holds floor(test_fraction * n) rows,
/// apportioned across classes by largest remainder (ties to the lower class
/// code), each class shuffled with the seeded generator. Throws DataError if
/// a class present in the data ends up missing from either side.
HoldoutSplit holdout_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);
HoldoutSplit holdout_split(const MixedDataset& ds, double test_fraction, std::uint64_t seed);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  int positive_class = 0;
  std::vector<RocPoint> points;
  /// Absent when the class has no positives or no negatives.
  std::optional<double> auc;
};

struct EvalReport {
  /// confusion[true][predicted], class order -1, 0, 1.
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> confusion{};
  std::size_t total = 0;
  double accuracy = 0.0;
  /// Absent for a class with no rows.
  std::array<std::optional<double>, kNumClasses> recall{};
  std::vector<RocCurve> roc;
  std::uint64_t split_seed = 0;
  double test_fraction = 0.0;
};

/// Confusion counts, accuracy and per-class recall.
EvalReport confusion(std::span<const int> predicted, std::span<const int> truth);

/// One-vs-rest ROC per class, scoring each row by that class's proportion.
/// Equal scores form one threshold group. AUC by the trapezoid rule.
std::vector<RocCurve> roc_ovr(std::span<const std::array<double, kNumClasses>> scores,
                              std::span<const int> truth);

/// Single-class ROC from raw scores and binary truth.
RocCurve roc_curve(std::span<const double> scores, const std::vector<bool>& positive);

nlohmann::json to_json(const EvalReport& report);
std::string roc_to_csv(const EvalReport& report);
std::string format_confusion(const EvalReport& report);

}  // namespace imst
