#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imst/factorize.hpp"
#include "imst/select.hpp"
#include "imst/tree.hpp"

namespace imst {

enum class TreeMode { Imst, Baseline };

std::string to_string(TreeMode mode);
TreeMode parse_tree_mode(const std::string& s);

/// Fully resolved run configuration.
///
/// The JSON layout mirrors the struct:
///   {"inputs": {"tabular": ..., "corpus": ..., "schema": ...},
///    "seed": 42, "min_count": 1, "output_dir": "out",
///    "factorize": {"k", "max_sweeps", "rel_tol", "epsilon_guard"},
///    "select": {"eps", "folds", "rule", "corr_tol", "max_steps"},
///    "tree": {"criterion", "min_node_size", "min_gain", "max_depth", "cv_folds", "leaf_error"},
///    "eval": {"test_fraction"}}
/// Relative input paths resolve against the config file's directory.
struct PipelineConfig {
  std::filesystem::path tabular;
  std::filesystem::path corpus;
  std::filesystem::path schema;
  std::filesystem::path output_dir = "imst_out";
  std::uint64_t seed = 42;
  int min_count = 1;
  FactorizeConfig factorize;
  StagewiseOptions select;
  GrowConfig tree;
  double test_fraction = 0.2;

  /// Parses a config object layered over the defaults. Unknown keys and bad
  /// values throw ConfigError.
  static PipelineConfig from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

  /// Checks values and that every input path exists.
  void validate() const;

  /// Resolved configuration with derived stage seeds filled in.
  nlohmann::json to_json() const;

  /// Digest of the resolved settings and the input file contents. The output
  /// directory and the spelling of input paths do not contribute.
  std::string hash() const;
};

nlohmann::json default_config_json();

/// Applies "a.b.c=value" to a JSON object. The value is parsed as JSON when
/// possible, otherwise taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

enum class Stage { Factorize, Select, Train, Evaluate };

struct StageOptions {
  TreeMode mode = TreeMode::Imst;
};

/// Runs one stage, reading prerequisite artifacts from and writing its own to
/// cfg.output_dir. Throws MissingArtifact when a prerequisite is absent or
/// was produced under a different config hash.
void run_stage(Stage stage, const PipelineConfig& cfg, const StageOptions& options = {});

/// Statistics report, correlation matrix (stats.json, stats.txt, correlation.csv).
void run_stats(const PipelineConfig& cfg);

struct ModelSummary {
  double accuracy = 0.0;
  std::size_t leaves = 0;
  int depth = 0;
  double alpha = 0.0;
  nlohmann::json recall;
  nlohmann::json auc;
};

struct PipelineSummary {
  std::string config_hash;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t lasso_nonzero = 0;
  ModelSummary imst;
  ModelSummary baseline;
  std::map<std::string, double> stage_seconds;

  nlohmann::json to_json() const;
  /// Stage timings are appended only when requested; summary.txt omits them.
  std::string format_text(bool with_timings = false) const;
};

/// factorize -> select -> train (IMST) -> train (baseline) -> evaluate.
/// Writes summary.json and summary.txt next to the stage artifacts.
PipelineSummary run_pipeline(const PipelineConfig& cfg);

/// Artifact file names inside the output directory.
namespace artifacts {
inline constexpr const char* kFactors = "factors.json";
inline constexpr const char* kSelected = "selected.json";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kSummary = "summary.json";
std::string tree_json(TreeMode mode);
std::string eval_json(TreeMode mode);
}  // namespace artifacts

}  // namespace imst
