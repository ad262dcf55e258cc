#include "imst/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "imst/error.hpp"
#include "imst/random.hpp"
#include "text_util.hpp"

namespace imst {

void FactorizeConfig::validate() const {
  if (k < 1) throw ConfigError("factorize.k must be positive");
  if (max_sweeps < 1) throw ConfigError("factorize.max_sweeps must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("factorize.rel_tol must be positive");
  if (!(epsilon_guard > 0.0) || !std::isfinite(epsilon_guard)) {
    throw ConfigError("factorize.epsilon_guard must be positive and finite");
  }
}

FactorPair init_factors(Eigen::Index n, Eigen::Index d, const FactorizeConfig& cfg) {
  cfg.validate();
  if (n < 1 || d < 1) throw ConfigError("factorize: matrix must be non-empty");
  if (cfg.k > std::min(n, d)) {
    throw ConfigError("factorize.k = " + std::to_string(cfg.k) + " exceeds min(n, d) = " +
                      std::to_string(std::min(n, d)));
  }
  Rng rng(cfg.seed);
  FactorPair f;
  f.seed = cfg.seed;
  f.U.resize(n, cfg.k);
  f.V.resize(d, cfg.k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < cfg.k; ++j) f.U(i, j) = rng.uniform_open();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < cfg.k; ++j) f.V(i, j) = rng.uniform_open();
  return f;
}

double objective(const Eigen::MatrixXd& D, const FactorPair& f) {
  if (f.U.rows() != D.rows() || f.V.rows() != D.cols() || f.U.cols() != f.V.cols()) {
    throw ConfigError("objective: factor shapes do not match the data matrix");
  }
  return 0.5 * (D - f.U * f.V.transpose()).squaredNorm();
}

double objective(const DocumentTermMatrix& D, const FactorPair& f) {
  return objective(D.counts, f);
}

void update_sweep(const Eigen::MatrixXd& D, FactorPair& f, double epsilon_guard) {
  if (f.U.rows() != D.rows() || f.V.rows() != D.cols() || f.U.cols() != f.V.cols()) {
    throw ConfigError("update_sweep: factor shapes do not match the data matrix");
  }
  // u <- u * (D V) / (U V^T V + guard)
  {
    const Eigen::MatrixXd numer = D * f.V;
    const Eigen::MatrixXd denom = f.U * (f.V.transpose() * f.V);
    f.U = f.U.cwiseProduct(numer).cwiseQuotient((denom.array() + epsilon_guard).matrix());
  }
  // v <- v * (D^T U) / (V U^T U + guard)
  {
    const Eigen::MatrixXd numer = D.transpose() * f.U;
    const Eigen::MatrixXd denom = f.V * (f.U.transpose() * f.U);
    f.V = f.V.cwiseProduct(numer).cwiseQuotient((denom.array() + epsilon_guard).matrix());
  }
  if (!f.U.allFinite() || !f.V.allFinite()) {
    throw NumericError("NMF factors became non-finite; epsilon_guard is too small");
  }
}

FactorPair factorize(const Eigen::MatrixXd& D, const FactorizeConfig& cfg) {
  if ((D.array() < 0.0).any()) throw DataError("factorize: matrix has negative entries");
  FactorPair f = init_factors(D.rows(), D.cols(), cfg);
  // Below this the reconstruction is exact to working precision and further
  // changes in J are rounding noise.
  const double exact_fit = std::numeric_limits<double>::epsilon() * 0.5 * D.squaredNorm();
  double prev = objective(D, f);
  f.objective_trace.push_back(prev);
  for (int sweep = 0; sweep < cfg.max_sweeps && prev > exact_fit; ++sweep) {
    update_sweep(D, f, cfg.epsilon_guard);
    const double cur = objective(D, f);
    f.objective_trace.push_back(cur);
    const double scale = std::max(prev, std::numeric_limits<double>::min());
    if (std::abs(cur - prev) / scale < cfg.rel_tol) break;
    prev = cur;
  }
  return f;
}

FactorPair factorize(const DocumentTermMatrix& D, const FactorizeConfig& cfg) {
  return factorize(D.counts, cfg);
}

std::vector<std::string> latent_names(int k) {
  std::vector<std::string> names;
  for (int j = 1; j <= k; ++j) names.push_back("Latent" + std::to_string(j));
  return names;
}

namespace {

nlohmann::json labelled_rows(const Eigen::MatrixXd& m, const std::vector<std::string>& labels) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> values(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) values[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back({{"label", labels.at(static_cast<std::size_t>(i))}, {"values", values}});
  }
  return rows;
}

Eigen::MatrixXd rows_to_matrix(const nlohmann::json& rows, Eigen::Index k) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto values = rows[i].at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != k) throw DataError("factor row has wrong width");
    for (Eigen::Index j = 0; j < k; ++j) {
      m(static_cast<Eigen::Index>(i), j) = values[static_cast<std::size_t>(j)];
    }
  }
  return m;
}

}  // namespace

nlohmann::json factors_to_json(const FactorPair& f, const std::vector<std::string>& doc_ids,
                               const std::vector<std::string>& lexicon) {
  return {{"k", f.k()},
          {"seed", f.seed},
          {"sweeps", f.sweeps()},
          {"objective_trace", f.objective_trace},
          {"U", labelled_rows(f.U, doc_ids)},
          {"V", labelled_rows(f.V, lexicon)}};
}

FactorPair factors_from_json(const nlohmann::json& j) {
  FactorPair f;
  const auto k = j.at("k").get<Eigen::Index>();
  f.seed = j.at("seed").get<std::uint64_t>();
  f.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  f.U = rows_to_matrix(j.at("U"), k);
  f.V = rows_to_matrix(j.at("V"), k);
  return f;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& row_labels,
                          const std::string& label_header) {
  std::ostringstream out;
  out << label_header;
  for (const auto& name : latent_names(static_cast<int>(m.cols()))) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << row_labels.at(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << detail::fmt_exact(m(i, j));
    out << '\n';
  }
  return out.str();
}

}  // namespace imst
