#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "imst/ingest.hpp"

namespace imst {

/// Planted-signal generator shaped like a small SME credit file.
///
/// Five numeric ratios (CA, RA, NA, EL, OA) share a common factor; the sum of
/// the standardized CA, RA and NA components places a row in "less" (-1),
/// "normal" (0) or, in its lower quartile, "more" (1) attention. Each document
/// mixes a risk topic and a healthy topic; a high risk share also marks the row
/// for "more" attention. Guarantee
/// and Term are nuisance categoricals. A fraction of labels is resampled
/// uniformly at random.
struct SyntheticOptions {
  std::size_t rows = 1000;
  std::uint64_t seed = 1;
  double label_noise = 0.05;
  /// Risk share above which a row is labelled 1.
  double risk_cutoff = 0.8;
  /// Standardized solvency below which a row is labelled 1 (lower quartile).
  double distress_cutoff = -0.6745;
  int tokens_per_doc = 12;
};

struct SyntheticData {
  MixedDataset dataset;
  TokenCorpus corpus;
  Schema schema;
};

SyntheticData make_synthetic(const SyntheticOptions& options);

/// Writes data.csv, docs.tsv, schema.json and config.json (k = 2) into dir.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace imst
