#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "imst/ingest.hpp"

namespace imst {

struct FactorizeConfig {
  int k = 6;
  int max_sweeps = 500;
  /// Stop once |J_t - J_{t-1}| / max(J_{t-1}, tiny) falls below this.
  double rel_tol = 1e-6;
  /// Added to every multiplicative-update denominator.
  double epsilon_guard = 1e-12;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Non-negative factors with D ~ U * V^T.
struct FactorPair {
  Eigen::MatrixXd U;  // n x k, document coordinates
  Eigen::MatrixXd V;  // d x k, term basis
  /// J before the first sweep, then J after every sweep.
  std::vector<double> objective_trace;
  std::uint64_t seed = 0;

  int k() const { return static_cast<int>(U.cols()); }
  int sweeps() const { return static_cast<int>(objective_trace.size()) - 1; }
};

/// U and V filled with seeded uniform draws in (0, 1), U first, row-major.
FactorPair init_factors(Eigen::Index n, Eigen::Index d, const FactorizeConfig& cfg);

/// J = 1/2 ||D - U V^T||_F^2.
double objective(const Eigen::MatrixXd& D, const FactorPair& f);
double objective(const DocumentTermMatrix& D, const FactorPair& f);

/// One multiplicative sweep: all of U from the current V, then all of V from
/// the new U. Zeros stay zero. Throws NumericError on NaN/Inf.
void update_sweep(const Eigen::MatrixXd& D, FactorPair& f, double epsilon_guard);

/// Runs sweeps until the relative objective change drops below rel_tol,
/// max_sweeps is reached, or J falls to machine epsilon times 1/2 ||D||_F^2
/// (an exact fit at double precision).
FactorPair factorize(const Eigen::MatrixXd& D, const FactorizeConfig& cfg);
FactorPair factorize(const DocumentTermMatrix& D, const FactorizeConfig& cfg);

/// Factor dump: U rows labelled by document id, V rows by term.
nlohmann::json factors_to_json(const FactorPair& f, const std::vector<std::string>& doc_ids,
                               const std::vector<std::string>& lexicon);
FactorPair factors_from_json(const nlohmann::json& j);

/// CSV with a leading label column and Latent1..Latentk headers.
std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& row_labels,
                          const std::string& label_header);

/// Latent column names: Latent1 .. Latentk.
std::vector<std::string> latent_names(int k);

}  // namespace imst
