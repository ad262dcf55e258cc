#include "imst/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "imst/error.hpp"
#include "imst/eval.hpp"
#include "imst/ingest.hpp"
#include "imst/random.hpp"
#include "text_util.hpp"

namespace imst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kBinnedFeature = "f_bin";

// ---------------------------------------------------------------------------
// Config plumbing

void merge_into(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("config: '" + prefix + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("config: unknown field '" + path + "'");
    if (base[key].is_object()) {
      merge_into(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
T field(const json& j, const std::string& path) {
  const json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->contains(key)) throw ConfigError("config: missing field '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field '" + path + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << content;
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

std::uint64_t split_seed(const PipelineConfig& cfg) { return derive_seed(cfg.seed, "split"); }

// ---------------------------------------------------------------------------
// Artifacts

json artifact_header(const PipelineConfig& cfg, const std::string& stage) {
  return {{"format_version", kFormatVersion}, {"config_hash", cfg.hash()}, {"stage", stage}};
}

json require_artifact(const PipelineConfig& cfg, const std::string& name) {
  const fs::path p = cfg.output_dir / name;
  if (!fs::exists(p)) {
    throw MissingArtifact("missing prerequisite artifact " + p.string());
  }
  json j;
  try {
    j = json::parse(read_file(p));
  } catch (const json::exception& e) {
    throw MissingArtifact("unreadable artifact " + p.string() + ": " + e.what());
  }
  const auto found = j.value("config_hash", std::string{});
  if (found != cfg.hash()) {
    throw MissingArtifact("artifact " + p.string() + " was produced under config hash " + found +
                          ", current config hash is " + cfg.hash() + "; rerun its stage");
  }
  return j;
}

void record_stage(const PipelineConfig& cfg, const std::string& stage, double seconds) {
  const fs::path p = cfg.output_dir / artifacts::kManifest;
  json manifest;
  if (fs::exists(p)) {
    try {
      manifest = json::parse(read_file(p));
    } catch (const json::exception&) {
      manifest = json();
    }
  }
  if (!manifest.is_object() || manifest.value("config_hash", std::string{}) != cfg.hash()) {
    manifest = {{"format_version", kFormatVersion},
                {"config_hash", cfg.hash()},
                {"seed", cfg.seed},
                {"config", cfg.to_json()},
                {"stages", json::object()}};
  }
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  manifest["stages"][stage] = {{"seconds", seconds}, {"finished_at", stamp}};
  write_json(p, manifest);
}

// ---------------------------------------------------------------------------
// Inputs and feature assembly

struct Inputs {
  MixedDataset dataset;
  TokenCorpus corpus;
};

Inputs load_inputs(const PipelineConfig& cfg) {
  const auto schema = Schema::load(cfg.schema);
  Inputs in;
  in.dataset = load_tabular(cfg.tabular, schema);
  in.corpus = align_corpus(load_documents(cfg.corpus), in.dataset);
  return in;
}

void attach_latents(MixedDataset& ds, const json& factors) {
  const auto f = factors_from_json(factors.at("factors"));
  const auto& rows = factors.at("factors").at("U");
  if (static_cast<std::size_t>(f.U.rows()) != ds.size()) {
    throw MissingArtifact("factor artifact does not match the dataset rows; rerun factorize");
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (rows[i].at("label").get<std::string>() != ds.row_ids[i]) {
      throw MissingArtifact("factor artifact row order does not match the dataset; rerun factorize");
    }
  }
  const auto names = latent_names(f.k());
  ds.latent.clear();
  for (int j = 0; j < f.k(); ++j) {
    NumericColumn col{names[static_cast<std::size_t>(j)], {}};
    col.values.assign(f.U.col(j).data(), f.U.col(j).data() + f.U.rows());
    ds.latent.push_back(std::move(col));
  }
}

void attach_binned_projection(MixedDataset& ds, const json& selected) {
  if (ds.find_categorical(kBinnedFeature)) {
    throw DataError(std::string("input already has a column named ") + kBinnedFeature);
  }
  const auto beta_v = selected.at("model").at("beta").get<std::vector<double>>();
  if (beta_v.size() != ds.numeric.size()) {
    throw MissingArtifact("selection artifact does not match the numeric columns; rerun select");
  }
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(beta_v.data(), static_cast<Eigen::Index>(beta_v.size()));
  const Eigen::VectorXd f = project_features(ds.numeric_matrix(), beta);
  const auto bp = selected.at("quartiles").at("breakpoints").get<std::array<double, 3>>();
  const auto binner = QuartileBinner::from_breakpoints(bp);
  CategoricalColumn col{kBinnedFeature, {}, {1, 2, 3, 4}};
  col.codes = binner.apply(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())));
  ds.categorical.push_back(std::move(col));
}

/// Dataset with latent columns (and the binned projection for IMST) attached.
MixedDataset assemble(const PipelineConfig& cfg, TreeMode mode) {
  auto inputs = load_inputs(cfg);
  attach_latents(inputs.dataset, require_artifact(cfg, artifacts::kFactors));
  if (mode == TreeMode::Imst) {
    attach_binned_projection(inputs.dataset, require_artifact(cfg, artifacts::kSelected));
  }
  return std::move(inputs.dataset);
}

std::vector<std::string> feature_names(const MixedDataset& ds, TreeMode mode) {
  return mode == TreeMode::Imst ? imst_feature_names(ds, kBinnedFeature) : baseline_feature_names(ds);
}

// ---------------------------------------------------------------------------
// Stages

void stage_factorize(const PipelineConfig& cfg) {
  const auto inputs = load_inputs(cfg);
  const auto dtm = build_dtm(inputs.corpus, cfg.min_count);
  const auto factors = factorize(dtm, cfg.factorize);
  json out = artifact_header(cfg, "factorize");
  out["rows"] = dtm.rows();
  out["lexicon"] = dtm.lexicon;
  out["factors"] = factors_to_json(factors, inputs.corpus.doc_ids, dtm.lexicon);
  write_json(cfg.output_dir / artifacts::kFactors, out);
  write_file(cfg.output_dir / "U.csv", matrix_to_csv(factors.U, inputs.corpus.doc_ids, "id"));
  write_file(cfg.output_dir / "V.csv", matrix_to_csv(factors.V, dtm.lexicon, "term"));
  std::ostringstream trace;
  trace << "sweep,objective\n";
  for (std::size_t s = 0; s < factors.objective_trace.size(); ++s) {
    trace << s << ',' << detail::fmt_exact(factors.objective_trace[s]) << '\n';
  }
  write_file(cfg.output_dir / "objective_trace.csv", trace.str());
}

void stage_select(const PipelineConfig& cfg) {
  const auto inputs = load_inputs(cfg);
  const auto& ds = inputs.dataset;
  if (ds.numeric.empty()) throw DataError("select: the schema declares no numeric columns");
  const auto split = holdout_split(ds, cfg.test_fraction, split_seed(cfg));
  const auto train = ds.subset(split.train);
  const Eigen::MatrixXd x = train.numeric_matrix();
  Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) y(static_cast<Eigen::Index>(i)) = train.labels[i];

  const auto model = cv_select(x, y, cfg.select, train.numeric_names());
  const Eigen::VectorXd f = project_features(x, model.beta);
  const auto binner = QuartileBinner::fit(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())));

  json out = artifact_header(cfg, "select");
  out["model"] = to_json(model);
  out["quartiles"] = {{"breakpoints", binner.breakpoints()}, {"degenerate", binner.degenerate()}};
  out["train_rows"] = split.train.size();
  write_json(cfg.output_dir / artifacts::kSelected, out);
  write_file(cfg.output_dir / "lasso_cv.csv", cv_to_csv(model));
  write_file(cfg.output_dir / "lasso_path.csv", path_to_csv(model));
}

void stage_train(const PipelineConfig& cfg, TreeMode mode) {
  const auto ds = assemble(cfg, mode);
  const auto split = holdout_split(ds, cfg.test_fraction, split_seed(cfg));
  const auto table = make_feature_table(ds.subset(split.train), feature_names(ds, mode));
  GrowConfig grow_cfg = cfg.tree;
  grow_cfg.seed = derive_seed(cfg.tree.seed, to_string(mode));
  const auto tree = train_tree(table, grow_cfg);

  json out = artifact_header(cfg, "train");
  out["mode"] = to_string(mode);
  out["tree"] = to_json(tree);
  write_json(cfg.output_dir / artifacts::tree_json(mode), out);
  write_file(cfg.output_dir / ("tree_" + to_string(mode) + ".txt"), format_rules(tree));
}

void evaluate_mode(const PipelineConfig& cfg, TreeMode mode) {
  const auto tree = tree_from_json(require_artifact(cfg, artifacts::tree_json(mode)).at("tree"));
  const auto ds = assemble(cfg, mode);
  const auto split = holdout_split(ds, cfg.test_fraction, split_seed(cfg));
  const auto test = ds.subset(split.test);
  const auto table = make_feature_table(test, tree.feature_names);
  const auto preds = predict(tree, table);

  std::vector<int> labels;
  std::vector<std::array<double, kNumClasses>> scores;
  for (const auto& p : preds) {
    labels.push_back(p.label);
    scores.push_back(p.proportions);
  }
  auto report = confusion(labels, test.labels);
  report.roc = roc_ovr(scores, test.labels);
  report.split_seed = split_seed(cfg);
  report.test_fraction = cfg.test_fraction;

  json out = artifact_header(cfg, "evaluate");
  out["mode"] = to_string(mode);
  out["report"] = to_json(report);
  out["leaves"] = tree.leaf_count();
  out["depth"] = tree.depth();
  out["prune_alpha"] = tree.prune_alpha;
  write_json(cfg.output_dir / artifacts::eval_json(mode), out);
  write_file(cfg.output_dir / ("roc_" + to_string(mode) + ".csv"), roc_to_csv(report));
  write_file(cfg.output_dir / ("confusion_" + to_string(mode) + ".txt"), format_confusion(report));
}

void stage_evaluate(const PipelineConfig& cfg) {
  const bool have_imst = fs::exists(cfg.output_dir / artifacts::tree_json(TreeMode::Imst));
  const bool have_baseline = fs::exists(cfg.output_dir / artifacts::tree_json(TreeMode::Baseline));
  if (!have_imst && !have_baseline) {
    throw MissingArtifact("missing prerequisite artifact " +
                          (cfg.output_dir / artifacts::tree_json(TreeMode::Imst)).string());
  }
  if (have_imst) evaluate_mode(cfg, TreeMode::Imst);
  if (have_baseline) evaluate_mode(cfg, TreeMode::Baseline);
}

std::string stage_name(Stage stage, const StageOptions& options) {
  switch (stage) {
    case Stage::Factorize: return "factorize";
    case Stage::Select: return "select";
    case Stage::Train: return "train_" + to_string(options.mode);
    case Stage::Evaluate: return "evaluate";
  }
  return "unknown";
}

ModelSummary summarize_model(const json& eval) {
  ModelSummary m;
  m.accuracy = eval.at("report").at("accuracy").get<double>();
  m.leaves = eval.at("leaves").get<std::size_t>();
  m.depth = eval.at("depth").get<int>();
  m.alpha = eval.at("prune_alpha").get<double>();
  m.recall = eval.at("report").at("per_class_recall");
  m.auc = eval.at("report").at("auc");
  return m;
}

json model_json(const ModelSummary& m) {
  return {{"accuracy", m.accuracy}, {"leaves", m.leaves}, {"depth", m.depth},
          {"alpha", m.alpha},       {"recall", m.recall}, {"auc", m.auc}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::string to_string(TreeMode mode) { return mode == TreeMode::Imst ? "imst" : "baseline"; }

TreeMode parse_tree_mode(const std::string& s) {
  if (s == "imst") return TreeMode::Imst;
  if (s == "baseline") return TreeMode::Baseline;
  throw ConfigError("mode must be \"imst\" or \"baseline\", got \"" + s + "\"");
}

std::string artifacts::tree_json(TreeMode mode) { return "tree_" + to_string(mode) + ".json"; }
std::string artifacts::eval_json(TreeMode mode) { return "eval_" + to_string(mode) + ".json"; }

json default_config_json() {
  return {{"inputs", {{"tabular", ""}, {"corpus", ""}, {"schema", ""}}},
          {"seed", 42},
          {"min_count", 1},
          {"output_dir", "imst_out"},
          {"factorize", {{"k", 6}, {"max_sweeps", 500}, {"rel_tol", 1e-6}, {"epsilon_guard", 1e-12}}},
          {"select",
           {{"eps", 0.0}, {"folds", 10}, {"rule", "1se"}, {"corr_tol", 1e-4}, {"max_steps", 10000}}},
          {"tree",
           {{"criterion", "gini"},
            {"min_node_size", 5},
            {"min_gain", 1e-6},
            {"max_depth", 12},
            {"cv_folds", 10},
            {"leaf_error", "squared"}}},
          {"eval", {{"test_fraction", 0.2}}}};
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(key)) throw ConfigError("config: unknown field '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("config: '" + path + "' is a section, not a value");
  *node = std::move(value);
}

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
  json merged = default_config_json();
  merge_into(merged, j, "");

  PipelineConfig cfg;
  cfg.tabular = resolve(field<std::string>(merged, "inputs.tabular"), base_dir);
  cfg.corpus = resolve(field<std::string>(merged, "inputs.corpus"), base_dir);
  cfg.schema = resolve(field<std::string>(merged, "inputs.schema"), base_dir);
  cfg.output_dir = resolve(field<std::string>(merged, "output_dir"), base_dir);
  cfg.seed = field<std::uint64_t>(merged, "seed");
  cfg.min_count = field<int>(merged, "min_count");

  cfg.factorize.k = field<int>(merged, "factorize.k");
  cfg.factorize.max_sweeps = field<int>(merged, "factorize.max_sweeps");
  cfg.factorize.rel_tol = field<double>(merged, "factorize.rel_tol");
  cfg.factorize.epsilon_guard = field<double>(merged, "factorize.epsilon_guard");
  cfg.factorize.seed = derive_seed(cfg.seed, "factorize");

  cfg.select.eps = field<double>(merged, "select.eps");
  cfg.select.folds = field<int>(merged, "select.folds");
  cfg.select.rule = parse_selection_rule(field<std::string>(merged, "select.rule"));
  cfg.select.corr_tol = field<double>(merged, "select.corr_tol");
  cfg.select.max_steps = field<int>(merged, "select.max_steps");
  cfg.select.seed = derive_seed(cfg.seed, "select");

  cfg.tree.criterion = parse_criterion(field<std::string>(merged, "tree.criterion"));
  cfg.tree.min_node_size = field<int>(merged, "tree.min_node_size");
  cfg.tree.min_gain = field<double>(merged, "tree.min_gain");
  cfg.tree.max_depth = field<int>(merged, "tree.max_depth");
  cfg.tree.cv_folds = field<int>(merged, "tree.cv_folds");
  cfg.tree.leaf_error = parse_leaf_error(field<std::string>(merged, "tree.leaf_error"));
  cfg.tree.seed = derive_seed(cfg.seed, "tree");

  cfg.test_fraction = field<double>(merged, "eval.test_fraction");
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  json merged = default_config_json();
  merge_into(merged, j, "");
  for (const auto& o : overrides) apply_override(merged, o);
  return from_json(merged, path.parent_path());
}

void PipelineConfig::validate() const {
  const auto check_path = [](const fs::path& p, const char* name) {
    if (p.empty()) throw ConfigError(std::string("config: inputs.") + name + " is not set");
    if (!fs::exists(p)) throw ConfigError(std::string("config: inputs.") + name + " does not exist: " + p.string());
  };
  check_path(tabular, "tabular");
  check_path(corpus, "corpus");
  check_path(schema, "schema");
  if (output_dir.empty()) throw ConfigError("config: output_dir is not set");
  if (min_count < 1) throw ConfigError("config: min_count must be at least 1");
  factorize.validate();
  if (select.folds < 2) throw ConfigError("config: select.folds must be at least 2");
  if (select.max_steps < 0) throw ConfigError("config: select.max_steps must be non-negative");
  if (!(select.corr_tol > 0.0)) throw ConfigError("config: select.corr_tol must be positive");
  if (select.eps < 0.0) throw ConfigError("config: select.eps must be non-negative (0 = automatic)");
  tree.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("config: eval.test_fraction must lie strictly between 0 and 1");
  }
}

json PipelineConfig::to_json() const {
  return {{"inputs", {{"tabular", tabular.string()}, {"corpus", corpus.string()}, {"schema", schema.string()}}},
          {"seed", seed},
          {"min_count", min_count},
          {"output_dir", output_dir.string()},
          {"factorize",
           {{"k", factorize.k},
            {"max_sweeps", factorize.max_sweeps},
            {"rel_tol", factorize.rel_tol},
            {"epsilon_guard", factorize.epsilon_guard},
            {"seed", factorize.seed}}},
          {"select",
           {{"eps", select.eps},
            {"folds", select.folds},
            {"rule", imst::to_string(select.rule)},
            {"corr_tol", select.corr_tol},
            {"max_steps", select.max_steps},
            {"seed", select.seed}}},
          {"tree",
           {{"criterion", imst::to_string(tree.criterion)},
            {"min_node_size", tree.min_node_size},
            {"min_gain", tree.min_gain},
            {"max_depth", tree.max_depth},
            {"cv_folds", tree.cv_folds},
            {"leaf_error", imst::to_string(tree.leaf_error)},
            {"seed", tree.seed}}},
          {"eval", {{"test_fraction", test_fraction}, {"split_seed", derive_seed(seed, "split")}}}};
}

std::string PipelineConfig::hash() const {
  json settings = to_json();
  settings.erase("inputs");
  settings.erase("output_dir");
  std::uint64_t h = fnv1a(settings.dump());
  for (const auto* p : {&tabular, &corpus, &schema}) {
    h = fnv1a(fs::exists(*p) ? read_file(*p) : std::string{}, h ^ 0xff);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void run_stage(Stage stage, const PipelineConfig& cfg, const StageOptions& options) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  const auto start = std::chrono::steady_clock::now();
  switch (stage) {
    case Stage::Factorize: stage_factorize(cfg); break;
    case Stage::Select: stage_select(cfg); break;
    case Stage::Train: stage_train(cfg, options.mode); break;
    case Stage::Evaluate: stage_evaluate(cfg); break;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  record_stage(cfg, stage_name(stage, options), elapsed.count());
}

void run_stats(const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  const auto ds = load_tabular(cfg.tabular, Schema::load(cfg.schema));
  const auto report = summarize(ds);
  write_json(cfg.output_dir / "stats.json", to_json(report));
  write_file(cfg.output_dir / "stats.txt", format_text(report));
  if (ds.numeric.size() >= 2) {
    write_file(cfg.output_dir / "correlation.csv", to_csv(correlation_matrix(ds)));
  }
}

json PipelineSummary::to_json() const {
  return {{"config_hash", config_hash},
          {"train_rows", train_rows},
          {"test_rows", test_rows},
          {"lasso_nonzero", lasso_nonzero},
          {"imst", model_json(imst)},
          {"baseline", model_json(baseline)}};
}

std::string PipelineSummary::format_text(bool with_timings) const {
  using detail::fmt_fixed;
  using detail::pad_left;
  using detail::pad_right;
  std::ostringstream out;
  out << "config " << config_hash << "  train rows " << train_rows << "  test rows " << test_rows
      << "  non-zero lasso coefficients " << lasso_nonzero << "\n\n";
  out << pad_right("model", 10) << pad_left("accuracy", 10) << pad_left("leaves", 8)
      << pad_left("depth", 7) << pad_left("recall(-1)", 12) << pad_left("recall(0)", 11)
      << pad_left("recall(1)", 11) << "\n";
  const auto line = [&](const std::string& name, const ModelSummary& m) {
    const auto r = [&](const char* key) {
      const auto& v = m.recall.at(key);
      return v.is_null() ? std::string("n/a") : fmt_fixed(100.0 * v.get<double>(), 1) + "%";
    };
    out << pad_right(name, 10) << pad_left(fmt_fixed(100.0 * m.accuracy, 1) + "%", 10)
        << pad_left(std::to_string(m.leaves), 8) << pad_left(std::to_string(m.depth), 7)
        << pad_left(r("-1"), 12) << pad_left(r("0"), 11) << pad_left(r("1"), 11) << "\n";
  };
  line("IMST", imst);
  line("baseline", baseline);
  if (with_timings && !stage_seconds.empty()) {
    out << "\nwall clock\n";
    for (const auto& [stage, s] : stage_seconds) {
      out << "  " << pad_right(stage, 16) << fmt_fixed(s, 3) << " s\n";
    }
  }
  return out.str();
}

PipelineSummary run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  PipelineSummary summary;
  const auto timed = [&](Stage stage, StageOptions options) {
    const auto start = std::chrono::steady_clock::now();
    run_stage(stage, cfg, options);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    summary.stage_seconds[stage_name(stage, options)] = elapsed.count();
  };
  const auto labelled = [&](const char* label, auto&& fn) {
    try {
      fn();
    } catch (const MissingArtifact& e) {
      throw MissingArtifact(std::string(label) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(label) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(label) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError(std::string(label) + ": " + e.what());
    }
  };
  labelled("factorize", [&] { timed(Stage::Factorize, {}); });
  labelled("select", [&] { timed(Stage::Select, {}); });
  labelled("train imst", [&] { timed(Stage::Train, {TreeMode::Imst}); });
  labelled("train baseline", [&] { timed(Stage::Train, {TreeMode::Baseline}); });
  labelled("evaluate", [&] { timed(Stage::Evaluate, {}); });

  summary.config_hash = cfg.hash();
  const auto selected = require_artifact(cfg, artifacts::kSelected);
  summary.lasso_nonzero = selected.at("model").at("nonzero").get<std::size_t>();
  summary.train_rows = selected.at("train_rows").get<std::size_t>();
  const auto imst_eval = require_artifact(cfg, artifacts::eval_json(TreeMode::Imst));
  summary.test_rows = imst_eval.at("report").at("total").get<std::size_t>();
  summary.imst = summarize_model(imst_eval);
  summary.baseline = summarize_model(require_artifact(cfg, artifacts::eval_json(TreeMode::Baseline)));

  write_json(cfg.output_dir / artifacts::kSummary, summary.to_json());
  write_file(cfg.output_dir / "summary.txt", summary.format_text(false));
  return summary;
}

}  // namespace imst
