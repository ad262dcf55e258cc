#include "imst/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "imst/error.hpp"
#include "imst/random.hpp"
#include "text_util.hpp"

namespace imst {

HoldoutSplit holdout_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("eval.test_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = labels.size();
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < n; ++i) members[class_index(labels[i])].push_back(i);

  const auto target = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
  std::array<std::size_t, kNumClasses> quota{};
  std::array<double, kNumClasses> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double exact = test_fraction * static_cast<double>(members[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  std::array<std::size_t, kNumClasses> by_remainder{0, 1, 2};
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target; k = (k + 1) % kNumClasses) {
    const std::size_t c = by_remainder[k];
    if (quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng(seed);
  HoldoutSplit split;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = members[c];
    if (rows.empty()) continue;
    if (quota[c] == 0 || quota[c] == rows.size()) {
      throw DataError("holdout split leaves class " + std::to_string(kClassCodes[c]) +
                      " absent from the " + (quota[c] == 0 ? "test" : "training") + " set");
    }
    rng.shuffle(rows);
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<long>(quota[c]));
    split.train.insert(split.train.end(), rows.begin() + static_cast<long>(quota[c]), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

HoldoutSplit holdout_split(const MixedDataset& ds, double test_fraction, std::uint64_t seed) {
  return holdout_split(ds.labels, test_fraction, seed);
}

EvalReport confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(truth.size()) + " labels");
  }
  EvalReport r;
  r.total = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[class_index(truth[i])][class_index(predicted[i])];
  }
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    correct += r.confusion[c][c];
    const std::size_t row = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), std::size_t{0});
    if (row > 0) r.recall[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
  }
  r.accuracy = r.total ? static_cast<double>(correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

RocCurve roc_curve(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw DataError("roc: score and label lengths differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  const std::size_t neg = n - pos;

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  if (pos == 0 || neg == 0) return curve;

  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < n;) {
    const double s = scores[order[i]];
    std::size_t j = i;
    for (; j < n && scores[order[j]] == s; ++j) (positive[order[j]] ? tp : fp)++;
    const RocPoint next{static_cast<double>(fp) / static_cast<double>(neg),
                        static_cast<double>(tp) / static_cast<double>(pos)};
    const RocPoint& prev = curve.points.back();
    area += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    curve.points.push_back(next);
    i = j;
  }
  curve.auc = area;
  return curve;
}

std::vector<RocCurve> roc_ovr(std::span<const std::array<double, kNumClasses>> scores,
                              std::span<const int> truth) {
  if (scores.size() != truth.size()) throw DataError("roc: score and label lengths differ");
  for (const auto& s : scores) {
    double sum = 0.0;
    for (double v : s) {
      if (!(v >= 0.0)) throw DataError("roc: scores must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("roc: score triple does not sum to 1");
  }
  std::vector<RocCurve> curves;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<double> s(scores.size());
    std::vector<bool> pos(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      s[i] = scores[i][c];
      pos[i] = class_index(truth[i]) == c;
    }
    auto curve = roc_curve(s, pos);
    curve.positive_class = kClassCodes[c];
    curves.push_back(std::move(curve));
  }
  return curves;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json recall = nlohmann::json::object();
  nlohmann::json auc = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto key = std::to_string(kClassCodes[c]);
    recall[key] = report.recall[c] ? nlohmann::json(*report.recall[c]) : nlohmann::json(nullptr);
  }
  for (const auto& curve : report.roc) {
    auc[std::to_string(curve.positive_class)] = curve.auc ? nlohmann::json(*curve.auc) : nlohmann::json(nullptr);
  }
  return {{"classes", kClassCodes},
          {"confusion", report.confusion},
          {"total", report.total},
          {"accuracy", report.accuracy},
          {"per_class_recall", recall},
          {"auc", auc},
          {"split_seed", report.split_seed},
          {"test_fraction", report.test_fraction}};
}

std::string roc_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class,fpr,tpr\n";
  for (const auto& curve : report.roc) {
    for (const auto& p : curve.points) {
      out << curve.positive_class << ',' << detail::fmt_exact(p.fpr) << ','
          << detail::fmt_exact(p.tpr) << '\n';
    }
  }
  return out.str();
}

std::string format_confusion(const EvalReport& report) {
  using detail::pad_left;
  std::ostringstream out;
  out << "true \\ predicted" << pad_left("-1", 8) << pad_left("0", 8) << pad_left("1", 8)
      << pad_left("recall", 10) << "\n";
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    out << pad_left(std::to_string(kClassCodes[t]), 16);
    for (std::size_t p = 0; p < kNumClasses; ++p) out << pad_left(std::to_string(report.confusion[t][p]), 8);
    out << pad_left(report.recall[t] ? detail::fmt_fixed(*report.recall[t], 4) : "n/a", 10) << "\n";
  }
  out << "accuracy: " << detail::fmt_fixed(report.accuracy, 4) << " (" << report.total << " rows)\n";
  return out.str();
}

}  // namespace imst
