// imst: command-line driver for the segmentation-tree pipeline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imst/error.hpp"
#include "imst/pipeline.hpp"
#include "imst/synthetic.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kMissingArtifact = 4,
};

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

imst::PipelineConfig load_config(const Globals& g, std::vector<std::string> extra = {}) {
  if (g.config_path.empty()) throw imst::ConfigError("--config is required");
  auto overrides = g.overrides;
  if (g.seed) overrides.push_back("seed=" + std::to_string(*g.seed));
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  return imst::PipelineConfig::load(g.config_path, overrides);
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const imst::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const imst::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const imst::MissingArtifact& e) {
    std::cerr << "missing prerequisite: " << e.what() << "\n";
    return kMissingArtifact;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrated multivariate segmentation tree pipeline"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("-c,--config", g.config_path, "Pipeline config (JSON)");
  app.add_option("--set", g.overrides, "Override a config field, e.g. --set tree.criterion=entropy")
      ->take_all()
      ->allow_extra_args(false);
  app.add_option("--seed", g.seed, "Global seed; all stage seeds derive from it");

  auto* factorize = app.add_subcommand("factorize", "Factor the document-term matrix into latents");
  auto* select = app.add_subcommand("select", "Stagewise Lasso path, CV budget and quartile bins");

  auto* train = app.add_subcommand("train", "Grow, cross-validate and prune a tree");
  std::string mode = "imst";
  std::string criterion;
  train->add_option("--mode", mode, "imst or baseline")->check(CLI::IsMember({"imst", "baseline"}));
  train->add_option("--criterion", criterion, "gini or entropy")->check(CLI::IsMember({"gini", "entropy"}));

  auto* evaluate = app.add_subcommand("evaluate", "Score trained trees on the holdout rows");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and print the comparison");
  auto* stats = app.add_subcommand("stats", "Summary statistics and correlation matrix");

  auto* synth = app.add_subcommand("synth", "Write a planted-signal dataset with a matching config");
  std::string synth_out = "synthetic";
  imst::SyntheticOptions synth_opts;
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--rows", synth_opts.rows, "Number of rows")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_opts.seed, "Generator seed");
  synth->add_option("--tokens", synth_opts.tokens_per_doc, "Tokens per document")->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_opts.label_noise, "Fraction of labels resampled")
      ->check(CLI::Range(0.0, 1.0));

  app.fallthrough();
  CLI11_PARSE(app, argc, argv);

  if (*factorize) {
    return guarded([&] { imst::run_stage(imst::Stage::Factorize, load_config(g)); });
  }
  if (*select) {
    return guarded([&] { imst::run_stage(imst::Stage::Select, load_config(g)); });
  }
  if (*train) {
    return guarded([&] {
      std::vector<std::string> extra;
      if (!criterion.empty()) extra.push_back("tree.criterion=" + criterion);
      imst::run_stage(imst::Stage::Train, load_config(g, extra), {imst::parse_tree_mode(mode)});
    });
  }
  if (*evaluate) {
    return guarded([&] { imst::run_stage(imst::Stage::Evaluate, load_config(g)); });
  }
  if (*pipeline) {
    return guarded([&] {
      const auto cfg = load_config(g);
      const auto summary = imst::run_pipeline(cfg);
      std::cout << summary.format_text(true);
      std::cout << "\nartifacts in " << cfg.output_dir.string() << "\n";
    });
  }
  if (*stats) {
    return guarded([&] {
      const auto cfg = load_config(g);
      imst::run_stats(cfg);
      std::cout << "wrote stats.json, stats.txt to " << cfg.output_dir.string() << "\n";
    });
  }
  if (*synth) {
    return guarded([&] {
      imst::write_synthetic(imst::make_synthetic(synth_opts), synth_out);
      std::cout << "wrote " << synth_opts.rows << " rows to " << synth_out << "\n";
    });
  }
  return kFailure;
}
