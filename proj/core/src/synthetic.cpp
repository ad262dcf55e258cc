#include "imst/synthetic.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "imst/error.hpp"
#include "imst/random.hpp"
#include "text_util.hpp"

namespace imst {

namespace {

constexpr std::array<const char*, 8> kRiskTerms{"overdue",  "bill_delinquency", "boss_absent", "unpaid",
                                                "tax_arrears", "rent_owed",    "layoff",      "idle_inventory"};
constexpr std::array<const char*, 8> kHealthyTerms{"sale",     "order",    "profit",      "employee",
                                                   "product",  "consumer", "recruitment", "overtime"};
constexpr std::array<const char*, 4> kSharedTerms{"enterprise", "company", "staff", "price"};

struct RatioShape {
  const char* name;
  double mean;
  double sd;
};
// Location and spread loosely follow typical balance-sheet ratios in percent.
constexpr std::array<RatioShape, 5> kRatios{{{"CA", 21.0, 8.0},
                                             {"RA", 17.0, 7.5},
                                             {"NA", 15.0, 6.0},
                                             {"EL", 64.0, 20.0},
                                             {"OA", 82.0, 22.0}}};

}  // namespace

SyntheticData make_synthetic(const SyntheticOptions& options) {
  if (options.rows < 20) throw ConfigError("synthetic: need at least 20 rows");
  Rng rng(options.seed);
  SyntheticData out;
  auto& ds = out.dataset;

  for (const auto& r : kRatios) ds.numeric.push_back({r.name, {}});
  ds.categorical.push_back({"Guarantee", {}, {0, 1, 2}});
  ds.categorical.push_back({"Term", {}, {1, 2, 3, 4}});

  for (std::size_t i = 0; i < options.rows; ++i) {
    const double common = rng.normal();
    std::array<double, 5> u{};
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = 0.6 * common + 0.8 * rng.normal();
    for (std::size_t j = 0; j < u.size(); ++j) {
      ds.numeric[j].values.push_back(kRatios[j].mean + kRatios[j].sd * u[j]);
    }
    // Standardized: the three components have pairwise covariance 0.36.
    const double solvency = (u[0] + u[1] + u[2]) / std::sqrt(3.0 + 6.0 * 0.36);

    const double risk = rng.uniform_open();
    std::vector<std::string> tokens;
    for (int t = 0; t < options.tokens_per_doc; ++t) {
      if (rng.uniform_open() < 0.2) {
        tokens.emplace_back(kSharedTerms[rng.index(kSharedTerms.size())]);
      } else if (rng.uniform_open() < risk) {
        tokens.emplace_back(kRiskTerms[rng.index(kRiskTerms.size())]);
      } else {
        tokens.emplace_back(kHealthyTerms[rng.index(kHealthyTerms.size())]);
      }
    }

    int label = 0;
    if (risk > options.risk_cutoff || solvency < options.distress_cutoff) {
      label = 1;
    } else if (solvency > 0.0) {
      label = -1;
    }
    if (rng.uniform_open() < options.label_noise) label = kClassCodes[rng.index(kNumClasses)];

    const std::string id = "sme" + std::to_string(i + 1);
    ds.row_ids.push_back(id);
    ds.labels.push_back(label);
    ds.categorical[0].codes.push_back(static_cast<int>(rng.index(3)));
    ds.categorical[1].codes.push_back(1 + static_cast<int>(rng.index(4)));
    out.corpus.doc_ids.push_back(id);
    out.corpus.docs.push_back(std::move(tokens));
  }

  out.schema.columns.push_back({"id", ColumnRole::Id, {}});
  for (const auto& r : kRatios) out.schema.columns.push_back({r.name, ColumnRole::Numeric, {}});
  out.schema.columns.push_back({"Guarantee", ColumnRole::Categorical, {0, 1, 2}});
  out.schema.columns.push_back({"Term", ColumnRole::Categorical, {1, 2, 3, 4}});
  out.schema.columns.push_back({"label", ColumnRole::Label, {}});
  ds.validate();
  return out;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& ds = data.dataset;
  {
    std::ofstream csv(dir / "data.csv");
    csv << "id";
    for (const auto& c : ds.numeric) csv << ',' << c.name;
    for (const auto& c : ds.categorical) csv << ',' << c.name;
    csv << ",label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
      csv << ds.row_ids[i];
      for (const auto& c : ds.numeric) csv << ',' << detail::fmt_exact(c.values[i]);
      for (const auto& c : ds.categorical) csv << ',' << c.codes[i];
      csv << ',' << ds.labels[i] << '\n';
    }
  }
  {
    std::ofstream docs(dir / "docs.tsv");
    for (std::size_t i = 0; i < data.corpus.size(); ++i) {
      docs << data.corpus.doc_ids[i];
      for (const auto& tok : data.corpus.docs[i]) docs << '\t' << tok;
      docs << '\n';
    }
  }
  {
    nlohmann::json cols = nlohmann::json::object();
    for (const auto& spec : data.schema.columns) {
      switch (spec.role) {
        case ColumnRole::Id: cols[spec.name] = "id"; break;
        case ColumnRole::Label: cols[spec.name] = "label"; break;
        case ColumnRole::Numeric: cols[spec.name] = "numeric"; break;
        case ColumnRole::Categorical:
          cols[spec.name] = {{"role", "categorical"}, {"codes", spec.codes}};
          break;
      }
    }
    std::ofstream(dir / "schema.json") << nlohmann::json{{"columns", cols}}.dump(2) << '\n';
  }
  {
    const nlohmann::json cfg{{"inputs", {{"tabular", "data.csv"}, {"corpus", "docs.tsv"}, {"schema", "schema.json"}}},
                             {"factorize", {{"k", 2}}},
                             {"output_dir", "out"}};
    std::ofstream(dir / "config.json") << cfg.dump(2) << '\n';
  }
}

}  // namespace imst
