#include "imst/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "imst/error.hpp"
#include "text_util.hpp"

namespace imst {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

ColumnRole parse_role(const std::string& s, const std::string& column) {
  if (s == "numeric") return ColumnRole::Numeric;
  if (s == "categorical") return ColumnRole::Categorical;
  if (s == "label") return ColumnRole::Label;
  if (s == "id") return ColumnRole::Id;
  throw ConfigError("schema: column '" + column + "' has unknown role '" + s + "'");
}

template <typename Column>
const Column* find_by_name(const std::vector<Column>& cols, const std::string& name) {
  auto it = std::find_if(cols.begin(), cols.end(),
                         [&](const Column& c) { return c.name == name; });
  return it == cols.end() ? nullptr : &*it;
}

template <typename Column>
std::vector<std::string> names_of(const std::vector<Column>& cols) {
  std::vector<std::string> out;
  out.reserve(cols.size());
  for (const auto& c : cols) out.push_back(c.name);
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::size_t class_index(int code) {
  switch (code) {
    case -1: return 0;
    case 0: return 1;
    case 1: return 2;
    default:
      throw DataError("label " + std::to_string(code) + " is outside {-1, 0, 1}");
  }
}

// ---------------------------------------------------------------------------
// Schema

Schema Schema::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_object()) {
    throw ConfigError("schema: expected an object with a \"columns\" object");
  }
  Schema schema;
  for (const auto& [name, value] : j["columns"].items()) {
    ColumnSpec spec;
    spec.name = name;
    if (value.is_string()) {
      spec.role = parse_role(value.get<std::string>(), name);
    } else if (value.is_object() && value.contains("role")) {
      spec.role = parse_role(value["role"].get<std::string>(), name);
      if (value.contains("codes")) {
        if (spec.role != ColumnRole::Categorical) {
          throw ConfigError("schema: column '" + name + "' lists codes but is not categorical");
        }
        spec.codes = value["codes"].get<std::vector<int>>();
        std::sort(spec.codes.begin(), spec.codes.end());
        spec.codes.erase(std::unique(spec.codes.begin(), spec.codes.end()), spec.codes.end());
      }
    } else {
      throw ConfigError("schema: column '" + name + "' needs a role");
    }
    schema.columns.push_back(std::move(spec));
  }
  const auto count_role = [&](ColumnRole r) {
    return std::count_if(schema.columns.begin(), schema.columns.end(),
                         [r](const ColumnSpec& c) { return c.role == r; });
  };
  if (count_role(ColumnRole::Label) != 1) throw ConfigError("schema: exactly one label column required");
  if (count_role(ColumnRole::Id) != 1) throw ConfigError("schema: exactly one id column required");
  return schema;
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("schema " + path.string() + ": " + e.what());
  }
}

const ColumnSpec* Schema::find(const std::string& name) const {
  return find_by_name(columns, name);
}

// ---------------------------------------------------------------------------
// MixedDataset

void MixedDataset::validate() const {
  const std::size_t n = labels.size();
  if (row_ids.size() != n) throw DataError("row id count differs from label count");
  for (int y : labels) class_index(y);
  for (const auto& c : numeric) {
    if (c.values.size() != n) throw DataError("numeric column '" + c.name + "' has wrong length");
  }
  for (const auto& c : latent) {
    if (c.values.size() != n) throw DataError("latent column '" + c.name + "' has wrong length");
  }
  for (const auto& c : categorical) {
    if (c.codes.size() != n) throw DataError("categorical column '" + c.name + "' has wrong length");
    for (int code : c.codes) {
      if (!std::binary_search(c.code_set.begin(), c.code_set.end(), code)) {
        throw DataError("categorical column '" + c.name + "' has undeclared code " +
                        std::to_string(code));
      }
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : row_ids) {
    if (!seen.insert(id).second) throw DataError("duplicate row id '" + id + "'");
  }
}

const NumericColumn* MixedDataset::find_numeric(const std::string& name) const {
  return find_by_name(numeric, name);
}
const NumericColumn* MixedDataset::find_latent(const std::string& name) const {
  return find_by_name(latent, name);
}
const CategoricalColumn* MixedDataset::find_categorical(const std::string& name) const {
  return find_by_name(categorical, name);
}

std::vector<std::string> MixedDataset::numeric_names() const { return names_of(numeric); }
std::vector<std::string> MixedDataset::categorical_names() const { return names_of(categorical); }
std::vector<std::string> MixedDataset::latent_names() const { return names_of(latent); }

Eigen::MatrixXd MixedDataset::numeric_matrix() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(numeric.size()));
  for (std::size_t j = 0; j < numeric.size(); ++j) {
    for (std::size_t i = 0; i < size(); ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = numeric[j].values[i];
    }
  }
  return x;
}

MixedDataset MixedDataset::subset(std::span<const std::size_t> rows) const {
  MixedDataset out;
  const auto pick = [&](const auto& src, auto& dst) {
    dst.reserve(rows.size());
    for (std::size_t r : rows) dst.push_back(src.at(r));
  };
  pick(row_ids, out.row_ids);
  pick(labels, out.labels);
  for (const auto& c : numeric) {
    NumericColumn col{c.name, {}};
    pick(c.values, col.values);
    out.numeric.push_back(std::move(col));
  }
  for (const auto& c : latent) {
    NumericColumn col{c.name, {}};
    pick(c.values, col.values);
    out.latent.push_back(std::move(col));
  }
  for (const auto& c : categorical) {
    CategoricalColumn col{c.name, {}, c.code_set};
    pick(c.codes, col.codes);
    out.categorical.push_back(std::move(col));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV loading

MixedDataset parse_tabular(std::istream& in, const Schema& schema) {
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!detail::trim(line).empty()) {
      header = detail::split_csv(line);
      break;
    }
  }
  if (header.empty()) throw DataError("missing header row");

  // Column position for each schema entry, and the reverse check.
  std::vector<std::size_t> position(schema.columns.size());
  for (std::size_t s = 0; s < schema.columns.size(); ++s) {
    auto it = std::find(header.begin(), header.end(), schema.columns[s].name);
    if (it == header.end()) {
      throw DataError("missing column '" + schema.columns[s].name + "'", line_no);
    }
    position[s] = static_cast<std::size_t>(it - header.begin());
  }
  for (const auto& h : header) {
    if (!schema.find(h)) throw DataError("column '" + h + "' is not declared in the schema", line_no);
  }

  MixedDataset ds;
  std::vector<std::size_t> numeric_slot(schema.columns.size(), 0);
  std::vector<std::size_t> categorical_slot(schema.columns.size(), 0);
  for (std::size_t s = 0; s < schema.columns.size(); ++s) {
    const auto& spec = schema.columns[s];
    if (spec.role == ColumnRole::Numeric) {
      numeric_slot[s] = ds.numeric.size();
      ds.numeric.push_back({spec.name, {}});
    } else if (spec.role == ColumnRole::Categorical) {
      categorical_slot[s] = ds.categorical.size();
      ds.categorical.push_back({spec.name, {}, spec.codes});
    }
  }

  std::unordered_set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                          std::to_string(cells.size()),
                      line_no);
    }
    for (std::size_t s = 0; s < schema.columns.size(); ++s) {
      const auto& spec = schema.columns[s];
      const std::string& cell = cells[position[s]];
      switch (spec.role) {
        case ColumnRole::Id:
          if (cell.empty()) throw DataError("empty id", line_no);
          if (!ids.insert(cell).second) throw DataError("duplicate id '" + cell + "'", line_no);
          ds.row_ids.push_back(cell);
          break;
        case ColumnRole::Label: {
          const auto v = detail::parse_int(cell);
          if (!v || (*v != -1 && *v != 0 && *v != 1)) {
            throw DataError("label '" + cell + "' is outside {-1, 0, 1}", line_no);
          }
          ds.labels.push_back(*v);
          break;
        }
        case ColumnRole::Numeric: {
          const auto v = detail::parse_double(cell);
          if (!v || !std::isfinite(*v)) {
            throw DataError("non-numeric value '" + cell + "' in column '" + spec.name + "'", line_no);
          }
          ds.numeric[numeric_slot[s]].values.push_back(*v);
          break;
        }
        case ColumnRole::Categorical: {
          const auto v = detail::parse_int(cell);
          if (!v) {
            throw DataError("non-integer code '" + cell + "' in column '" + spec.name + "'", line_no);
          }
          if (!spec.codes.empty() && !std::binary_search(spec.codes.begin(), spec.codes.end(), *v)) {
            throw DataError("code " + std::to_string(*v) + " not declared for column '" +
                                spec.name + "'",
                            line_no);
          }
          ds.categorical[categorical_slot[s]].codes.push_back(*v);
          break;
        }
      }
    }
  }

  for (auto& c : ds.categorical) {
    if (c.code_set.empty()) {
      c.code_set = c.codes;
      std::sort(c.code_set.begin(), c.code_set.end());
      c.code_set.erase(std::unique(c.code_set.begin(), c.code_set.end()), c.code_set.end());
    }
  }
  ds.validate();
  return ds;
}

MixedDataset load_tabular(const std::filesystem::path& path, const Schema& schema) {
  auto in = open_input(path);
  try {
    return parse_tabular(in, schema);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Documents

TokenCorpus parse_documents(std::istream& in) {
  TokenCorpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) throw DataError("empty line", line_no);
    auto fields = detail::split(line, '\t');
    const std::string id(detail::trim(fields.front()));
    if (id.empty()) throw DataError("missing document id", line_no);
    std::vector<std::string> tokens;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto tok = detail::trim(fields[i]);
      if (!tok.empty()) tokens.emplace_back(tok);
    }
    if (tokens.empty()) throw DataError("document '" + id + "' has no tokens", line_no);
    if (!ids.insert(id).second) throw DataError("duplicate document id '" + id + "'", line_no);
    corpus.doc_ids.push_back(id);
    corpus.docs.push_back(std::move(tokens));
  }
  return corpus;
}

TokenCorpus load_documents(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return parse_documents(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

TokenCorpus align_corpus(const TokenCorpus& corpus, const MixedDataset& ds) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_id.emplace(corpus.doc_ids[i], i);
  TokenCorpus out;
  out.doc_ids.reserve(ds.size());
  out.docs.reserve(ds.size());
  for (const auto& id : ds.row_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("row '" + id + "' has no document");
    out.doc_ids.push_back(id);
    out.docs.push_back(corpus.docs[it->second]);
  }
  if (corpus.size() != ds.size()) {
    std::unordered_set<std::string> rows(ds.row_ids.begin(), ds.row_ids.end());
    for (const auto& id : corpus.doc_ids) {
      if (!rows.count(id)) throw DataError("document '" + id + "' has no tabular row");
    }
  }
  return out;
}

DocumentTermMatrix build_dtm(const TokenCorpus& corpus, int min_count) {
  if (corpus.size() == 0) throw DataError("corpus is empty");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");

  std::map<std::string, long> totals;
  for (const auto& doc : corpus.docs) {
    for (const auto& tok : doc) ++totals[tok];
  }
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [term, count] : totals) {
    if (count >= min_count) kept.emplace_back(term, count);
  }
  if (kept.empty()) throw DataError("lexicon is empty after min_count filtering");
  // std::map iteration is already lexicographic, so a stable sort on count suffices.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  DocumentTermMatrix dtm;
  std::unordered_map<std::string, Eigen::Index> column;
  for (const auto& [term, count] : kept) {
    column.emplace(term, static_cast<Eigen::Index>(dtm.lexicon.size()));
    dtm.lexicon.push_back(term);
  }
  dtm.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.size()),
                                     static_cast<Eigen::Index>(dtm.lexicon.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& tok : corpus.docs[i]) {
      if (auto it = column.find(tok); it != column.end()) {
        dtm.counts(static_cast<Eigen::Index>(i), it->second) += 1.0;
      }
    }
  }
  return dtm;
}

// ---------------------------------------------------------------------------
// Statistics

StatsReport summarize(const MixedDataset& ds) {
  const std::size_t n = ds.size();
  if (n < 2) throw DataError("summary statistics need at least 2 rows");
  StatsReport report;
  report.rows = n;
  for (const auto& col : ds.numeric) {
    NumericSummary s;
    s.name = col.name;
    s.mean = mean_of(col.values);
    double ss = 0.0;
    for (double x : col.values) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
    s.zero_variance = ss == 0.0;
    if (s.mean != 0.0) {
      s.cv = 100.0 * s.sd / s.mean;
    } else if (s.zero_variance) {
      s.cv = 0.0;
    }
    report.numeric.push_back(std::move(s));
  }

  const auto tabulate = [n](const std::string& name, const std::vector<int>& codes,
                            std::vector<int> levels) {
    std::map<int, std::size_t> counts;
    for (int lv : levels) counts[lv] = 0;
    for (int c : codes) ++counts[c];
    CategoricalSummary s;
    s.name = name;
    for (const auto& [code, count] : counts) {
      s.levels.push_back({code, count, 100.0 * static_cast<double>(count) / static_cast<double>(n)});
    }
    return s;
  };
  for (const auto& col : ds.categorical) {
    report.categorical.push_back(tabulate(col.name, col.codes, col.code_set));
  }
  report.categorical.push_back(
      tabulate("label", ds.labels, std::vector<int>(kClassCodes.begin(), kClassCodes.end())));
  return report;
}

nlohmann::json to_json(const StatsReport& report) {
  nlohmann::json j;
  j["rows"] = report.rows;
  j["sd_convention"] = "sample (n-1)";
  j["numeric"] = nlohmann::json::array();
  for (const auto& s : report.numeric) {
    j["numeric"].push_back({{"name", s.name},
                            {"mean", s.mean},
                            {"sd", s.sd},
                            {"cv", s.cv ? nlohmann::json(*s.cv) : nlohmann::json(nullptr)},
                            {"zero_variance", s.zero_variance}});
  }
  j["categorical"] = nlohmann::json::array();
  for (const auto& c : report.categorical) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lv : c.levels) {
      levels.push_back({{"value", lv.code}, {"frequency", lv.count}, {"percentage", lv.percent}});
    }
    j["categorical"].push_back({{"name", c.name}, {"levels", levels}});
  }
  return j;
}

std::string format_text(const StatsReport& report) {
  using detail::fmt_fixed;
  using detail::pad_left;
  using detail::pad_right;
  std::ostringstream out;
  out << "rows: " << report.rows << "  (standard deviation: sample, n-1)\n\n";
  std::size_t w = 8;
  for (const auto& s : report.numeric) w = std::max(w, s.name.size() + 2);
  out << pad_right("Variable", w) << pad_left("Mean", 12) << pad_left("SD", 12)
      << pad_left("CV", 12) << "\n";
  for (const auto& s : report.numeric) {
    out << pad_right(s.name, w) << pad_left(fmt_fixed(s.mean, 2), 12)
        << pad_left(fmt_fixed(s.sd, 2), 12)
        << pad_left(s.cv ? fmt_fixed(*s.cv, 2) : std::string("n/a"), 12);
    if (s.zero_variance) out << "  [zero variance]";
    out << "\n";
  }
  out << "\n";
  w = 8;
  for (const auto& c : report.categorical) w = std::max(w, c.name.size() + 2);
  out << pad_right("Variable", w) << pad_left("Value", 8) << pad_left("Frequency", 12)
      << pad_left("Percentage", 14) << "\n";
  for (const auto& c : report.categorical) {
    bool first = true;
    for (const auto& lv : c.levels) {
      out << pad_right(first ? c.name : "", w) << pad_left(std::to_string(lv.code), 8)
          << pad_left(std::to_string(lv.count), 12) << pad_left(fmt_fixed(lv.percent, 4), 14)
          << "\n";
      first = false;
    }
  }
  return out.str();
}

CorrelationMatrix correlation_matrix(const MixedDataset& ds) {
  if (ds.numeric.size() < 2) throw DataError("correlation needs at least 2 numeric columns");
  const std::size_t n = ds.size();
  const std::size_t p = ds.numeric.size();
  std::vector<std::vector<double>> centered(p);
  std::vector<double> norms(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& v = ds.numeric[j].values;
    const double m = mean_of(v);
    centered[j].resize(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      centered[j][i] = v[i] - m;
      ss += centered[j][i] * centered[j][i];
    }
    if (ss == 0.0) throw DataError("column '" + ds.numeric[j].name + "' has zero variance");
    norms[j] = std::sqrt(ss);
  }
  CorrelationMatrix corr;
  corr.names = ds.numeric_names();
  const auto pp = static_cast<Eigen::Index>(p);
  corr.values = Eigen::MatrixXd::Identity(pp, pp);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += centered[a][i] * centered[b][i];
      const double r = std::clamp(s / (norms[a] * norms[b]), -1.0, 1.0);
      corr.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r;
      corr.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = r;
    }
  }
  return corr;
}

std::string to_csv(const CorrelationMatrix& corr) {
  std::ostringstream out;
  out << "variable";
  for (const auto& n : corr.names) out << ',' << n;
  out << '\n';
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
    out << corr.names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < corr.values.cols(); ++j) {
      out << ',' << detail::fmt_fixed(corr.values(i, j), 6);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace imst
