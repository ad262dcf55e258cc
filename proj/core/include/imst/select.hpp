#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace imst {

/// Column centering/scaling used to move between raw and standardized
/// coefficient scales.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // sample (n - 1)
  double y_mean = 0.0;

  static Standardization fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;

  /// beta_raw_j = beta_std_j / sd_j
  Eigen::VectorXd to_raw(const Eigen::VectorXd& beta_std) const;
  /// Intercept matching to_raw(beta_std).
  double raw_intercept(const Eigen::VectorXd& beta_std) const;
};

struct PathStep {
  Eigen::VectorXd beta;
  double l1_norm = 0.0;
  /// Coordinate moved to reach this state; -1 for the all-zero start.
  int coordinate = -1;
};

enum class PathStop { Uncorrelated, MaxSteps, Resolution };

/// Forward-stagewise coefficient path on the standardized scale.
struct LassoPath {
  std::vector<PathStep> steps;
  double step_size = 0.0;
  PathStop stop = PathStop::Uncorrelated;

  /// Last state whose L1 norm does not exceed the budget.
  const PathStep& at_budget(double budget) const;
  double max_budget() const { return steps.back().l1_norm; }
};

/// 0.01 * max_j |<x_j, y>| / n, or 0.01 when every correlation is zero.
double default_step_size(const Eigen::MatrixXd& X_std, const Eigen::VectorXd& y_centered);

/// Incremental forward-stagewise regression.
///
/// Each step moves the coefficient of the predictor most correlated with the
/// residual (ties to the lowest index) by eps in the sign of that correlation.
/// The path ends when max_j |<x_j, r>| / n < corr_tol, after max_steps steps,
/// or when the next step would shrink the L1 norm, i.e. the path has reached
/// the least-squares fit at resolution eps and would start oscillating.
///
/// X must have standardized columns (mean 0, unit sample sd); y must be centered.
LassoPath stagewise_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double eps,
                         int max_steps = 10000, double corr_tol = 1e-4);

enum class SelectionRule { Min, OneSE };

struct CvPoint {
  double budget = 0.0;
  double mean_mse = 0.0;
  double se = 0.0;
};

struct StagewiseOptions {
  /// <= 0 selects default_step_size on the full data.
  double eps = 0.0;
  double corr_tol = 1e-4;
  int max_steps = 10000;
  int folds = 10;
  SelectionRule rule = SelectionRule::OneSE;
  std::uint64_t seed = 0;
};

struct SelectedModel {
  std::vector<std::string> predictor_names;
  /// Raw-scale coefficients, zero for dropped predictors.
  Eigen::VectorXd beta;
  Eigen::VectorXd beta_standardized;
  double intercept = 0.0;
  double t_selected = 0.0;
  double t_min = 0.0;
  double t_1se = 0.0;
  SelectionRule rule = SelectionRule::OneSE;
  std::vector<CvPoint> cv;
  LassoPath path;
  Standardization scaling;

  std::size_t nonzero() const;
};

/// Fits the path on all rows, then scores every path budget by k-fold CV
/// (each fold refits its own path with the same step size) and picks the
/// budget under the configured rule.
SelectedModel cv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const StagewiseOptions& options,
                        std::vector<std::string> predictor_names = {});

/// f_i = sum_j beta_j X_ij, with beta on the raw scale.
Eigen::VectorXd project_features(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta);

/// Breakpoints at the 25th/50th/75th linear-interpolation percentiles.
/// Bin b covers (q_{b-1}, q_b]; values above q75 fall into bin 4.
class QuartileBinner {
 public:
  static QuartileBinner fit(std::span<const double> values);
  static QuartileBinner from_breakpoints(std::array<double, 3> breakpoints);

  int bin(double value) const;
  std::vector<int> apply(std::span<const double> values) const;

  const std::array<double, 3>& breakpoints() const { return breakpoints_; }
  /// True when two breakpoints coincide (heavily tied or constant input).
  bool degenerate() const;

 private:
  std::array<double, 3> breakpoints_{};
};

struct QuartileBins {
  std::vector<int> bins;
  QuartileBinner binner;
};

QuartileBins bin_quartiles(std::span<const double> f);

/// Linear-interpolation ("type 7") percentile of unsorted data, p in [0, 1].
double percentile(std::span<const double> values, double p);

nlohmann::json to_json(const SelectedModel& model);
std::string path_to_csv(const SelectedModel& model);
std::string cv_to_csv(const SelectedModel& model);

std::string to_string(SelectionRule rule);
SelectionRule parse_selection_rule(const std::string& s);

}  // namespace imst
