#include "imst/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "imst/error.hpp"
#include "imst/random.hpp"
#include "text_util.hpp"

namespace imst {

namespace {

constexpr double kStandardizedTol = 1e-6;

void check_standardized(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto n = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double m = X.col(j).mean();
    const double sd = std::sqrt((X.col(j).array() - m).square().sum() / (n - 1.0));
    if (std::abs(m) > kStandardizedTol || std::abs(sd - 1.0) > kStandardizedTol) {
      throw DataError("stagewise_path: column " + std::to_string(j) +
                      " is not standardized (mean 0, unit sd)");
    }
  }
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (std::abs(y.mean()) > kStandardizedTol * scale) {
    throw DataError("stagewise_path: response is not centered");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Standardization

Standardization Standardization::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() < 2) throw DataError("standardization needs at least 2 rows");
  Standardization s;
  const auto n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean().transpose();
  s.sd.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double ss = (X.col(j).array() - s.mean(j)).square().sum();
    s.sd(j) = std::sqrt(ss / (n - 1.0));
    if (!(s.sd(j) > 0.0)) {
      throw DataError("predictor column " + std::to_string(j) + " has zero variance");
    }
  }
  s.y_mean = y.size() > 0 ? y.mean() : 0.0;
  return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out = X.rowwise() - mean.transpose();
  for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) /= sd(j);
  return out;
}

Eigen::VectorXd Standardization::to_raw(const Eigen::VectorXd& beta_std) const {
  return beta_std.cwiseQuotient(sd);
}

double Standardization::raw_intercept(const Eigen::VectorXd& beta_std) const {
  return y_mean - to_raw(beta_std).dot(mean);
}

// ---------------------------------------------------------------------------
// Path

const PathStep& LassoPath::at_budget(double budget) const {
  const double slack = 1e-9 * std::max(step_size, 1e-300);
  auto it = std::upper_bound(steps.begin(), steps.end(), budget + slack,
                             [](double t, const PathStep& s) { return t < s.l1_norm; });
  return it == steps.begin() ? steps.front() : *std::prev(it);
}

double default_step_size(const Eigen::MatrixXd& X_std, const Eigen::VectorXd& y_centered) {
  const double max_corr =
      (X_std.transpose() * y_centered).cwiseAbs().maxCoeff() / static_cast<double>(X_std.rows());
  return max_corr > 0.0 ? 0.01 * max_corr : 0.01;
}

LassoPath stagewise_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double eps,
                         int max_steps, double corr_tol) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("stagewise step size must be positive");
  if (X.rows() != y.size()) throw DataError("stagewise_path: X and y lengths differ");
  if (X.rows() < 2 || X.cols() < 1) throw DataError("stagewise_path: need at least 2 rows and 1 column");
  check_standardized(X, y);

  const auto p = X.cols();
  const auto n = static_cast<double>(X.rows());
  const Eigen::MatrixXd gram = X.transpose() * X;
  Eigen::VectorXd corr = X.transpose() * y;  // <x_j, r>
  // Integer step counts keep every coefficient an exact multiple of eps.
  std::vector<long> units(static_cast<std::size_t>(p), 0);
  long total_units = 0;

  LassoPath path;
  path.step_size = eps;
  path.steps.push_back({Eigen::VectorXd::Zero(p), 0.0, -1});

  for (int step = 0;; ++step) {
    Eigen::Index j = 0;
    double best = -1.0;
    for (Eigen::Index c = 0; c < p; ++c) {
      if (std::abs(corr(c)) > best) {
        best = std::abs(corr(c));
        j = c;
      }
    }
    if (best / n < corr_tol) {
      path.stop = PathStop::Uncorrelated;
      break;
    }
    if (step >= max_steps) {
      path.stop = PathStop::MaxSteps;
      break;
    }
    const long direction = corr(j) > 0.0 ? 1 : -1;
    auto& u = units[static_cast<std::size_t>(j)];
    if (u != 0 && (u > 0) != (direction > 0)) {
      path.stop = PathStop::Resolution;
      break;
    }
    u += direction;
    ++total_units;
    corr -= (static_cast<double>(direction) * eps) * gram.col(j);

    PathStep s;
    s.beta.resize(p);
    for (Eigen::Index c = 0; c < p; ++c) {
      s.beta(c) = static_cast<double>(units[static_cast<std::size_t>(c)]) * eps;
    }
    s.l1_norm = static_cast<double>(total_units) * eps;
    s.coordinate = static_cast<int>(j);
    path.steps.push_back(std::move(s));
  }
  return path;
}

// ---------------------------------------------------------------------------
// Cross-validated selection

std::size_t SelectedModel::nonzero() const {
  return static_cast<std::size_t>((beta.array() != 0.0).count());
}

SelectedModel cv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const StagewiseOptions& options,
                        std::vector<std::string> predictor_names) {
  const auto n = X.rows();
  if (options.folds < 2) throw ConfigError("select.folds must be at least 2");
  if (n < options.folds) {
    throw DataError("cv_select: " + std::to_string(n) + " rows is fewer than " +
                    std::to_string(options.folds) + " folds");
  }
  if (y.size() != n) throw DataError("cv_select: X and y lengths differ");
  if (predictor_names.empty()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) predictor_names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(predictor_names.size()) != X.cols()) {
    throw ConfigError("cv_select: predictor name count differs from column count");
  }

  SelectedModel model;
  model.predictor_names = std::move(predictor_names);
  model.rule = options.rule;
  model.scaling = Standardization::fit(X, y);
  const Eigen::MatrixXd xs = model.scaling.apply(X);
  const Eigen::VectorXd yc = y.array() - model.scaling.y_mean;
  const double eps = options.eps > 0.0 ? options.eps : default_step_size(xs, yc);
  model.path = stagewise_path(xs, yc, eps, options.max_steps, options.corr_tol);

  // Fold assignment: seeded permutation, then round-robin.
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);
  rng.shuffle(order);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) {
    fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(options.folds));
  }

  const std::size_t budgets = model.path.steps.size();
  std::vector<std::vector<double>> mse(budgets, std::vector<double>(static_cast<std::size_t>(options.folds)));
  for (int fold = 0; fold < options.folds; ++fold) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == fold ? test : train).push_back(i);
    }
    const Eigen::MatrixXd x_train = X(train, Eigen::all);
    const Eigen::VectorXd y_train = y(train);
    const Eigen::MatrixXd x_test = X(test, Eigen::all);
    const Eigen::VectorXd y_test = y(test);
    const auto scaling = Standardization::fit(x_train, y_train);
    const auto fold_path =
        stagewise_path(scaling.apply(x_train), (y_train.array() - scaling.y_mean).matrix(), eps,
                       options.max_steps, options.corr_tol);
    const Eigen::MatrixXd xs_test = scaling.apply(x_test);
    for (std::size_t b = 0; b < budgets; ++b) {
      const auto& state = fold_path.at_budget(model.path.steps[b].l1_norm);
      const Eigen::VectorXd pred = (xs_test * state.beta).array() + scaling.y_mean;
      mse[b][static_cast<std::size_t>(fold)] = (y_test - pred).squaredNorm() / static_cast<double>(test.size());
    }
  }

  const auto k = static_cast<double>(options.folds);
  std::size_t best = 0;
  for (std::size_t b = 0; b < budgets; ++b) {
    CvPoint pt;
    pt.budget = model.path.steps[b].l1_norm;
    pt.mean_mse = std::accumulate(mse[b].begin(), mse[b].end(), 0.0) / k;
    double ss = 0.0;
    for (double m : mse[b]) ss += (m - pt.mean_mse) * (m - pt.mean_mse);
    pt.se = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    model.cv.push_back(pt);
    if (pt.mean_mse < model.cv[best].mean_mse) best = b;
  }
  const double threshold = model.cv[best].mean_mse + model.cv[best].se;
  std::size_t one_se = best;
  for (std::size_t b = 0; b <= best; ++b) {
    if (model.cv[b].mean_mse <= threshold) {
      one_se = b;
      break;
    }
  }
  model.t_min = model.cv[best].budget;
  model.t_1se = model.cv[one_se].budget;
  const std::size_t chosen = options.rule == SelectionRule::OneSE ? one_se : best;
  model.t_selected = model.cv[chosen].budget;
  model.beta_standardized = model.path.steps[chosen].beta;
  model.beta = model.scaling.to_raw(model.beta_standardized);
  model.intercept = model.scaling.raw_intercept(model.beta_standardized);
  return model;
}

Eigen::VectorXd project_features(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
  if (X.cols() != beta.size()) {
    throw DataError("project_features: " + std::to_string(beta.size()) + " coefficients for " +
                    std::to_string(X.cols()) + " columns");
  }
  return X * beta;
}

// ---------------------------------------------------------------------------
// Quartile binning

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw DataError("percentile of empty data");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

QuartileBinner QuartileBinner::fit(std::span<const double> values) {
  if (values.size() < 4) throw DataError("quartile binning needs at least 4 rows");
  return from_breakpoints(
      {percentile(values, 0.25), percentile(values, 0.50), percentile(values, 0.75)});
}

QuartileBinner QuartileBinner::from_breakpoints(std::array<double, 3> breakpoints) {
  QuartileBinner b;
  b.breakpoints_ = breakpoints;
  return b;
}

int QuartileBinner::bin(double value) const {
  for (int b = 0; b < 3; ++b) {
    if (value <= breakpoints_[static_cast<std::size_t>(b)]) return b + 1;
  }
  return 4;
}

std::vector<int> QuartileBinner::apply(std::span<const double> values) const {
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(bin(v));
  return out;
}

bool QuartileBinner::degenerate() const {
  return breakpoints_[0] == breakpoints_[1] || breakpoints_[1] == breakpoints_[2];
}

QuartileBins bin_quartiles(std::span<const double> f) {
  QuartileBins out{{}, QuartileBinner::fit(f)};
  out.bins = out.binner.apply(f);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_string(SelectionRule rule) {
  return rule == SelectionRule::OneSE ? "1se" : "min";
}

SelectionRule parse_selection_rule(const std::string& s) {
  if (s == "1se") return SelectionRule::OneSE;
  if (s == "min") return SelectionRule::Min;
  throw ConfigError("select.rule must be \"min\" or \"1se\", got \"" + s + "\"");
}

nlohmann::json to_json(const SelectedModel& model) {
  const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); };
  return {{"predictors", model.predictor_names},
          {"beta", vec(model.beta)},
          {"beta_standardized", vec(model.beta_standardized)},
          {"intercept", model.intercept},
          {"rule", to_string(model.rule)},
          {"t_selected", model.t_selected},
          {"t_min", model.t_min},
          {"t_1se", model.t_1se},
          {"step_size", model.path.step_size},
          {"path_steps", model.path.steps.size() - 1},
          {"nonzero", model.nonzero()},
          {"scaling", {{"mean", vec(model.scaling.mean)}, {"sd", vec(model.scaling.sd)},
                       {"y_mean", model.scaling.y_mean}}}};
}

std::string path_to_csv(const SelectedModel& model) {
  std::ostringstream out;
  out << "step,l1_budget";
  for (const auto& name : model.predictor_names) out << ',' << name;
  out << '\n';
  for (std::size_t s = 0; s < model.path.steps.size(); ++s) {
    const auto& st = model.path.steps[s];
    out << s << ',' << detail::fmt_exact(st.l1_norm);
    for (Eigen::Index j = 0; j < st.beta.size(); ++j) out << ',' << detail::fmt_exact(st.beta(j));
    out << '\n';
  }
  return out.str();
}

std::string cv_to_csv(const SelectedModel& model) {
  std::ostringstream out;
  out << "l1_budget,mean_mse,se\n";
  for (const auto& pt : model.cv) {
    out << detail::fmt_exact(pt.budget) << ',' << detail::fmt_exact(pt.mean_mse) << ','
        << detail::fmt_exact(pt.se) << '\n';
  }
  return out.str();
}

}  // namespace imst
