#pragma once

// Seeded random instance generators for property tests.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "imst/random.hpp"
#include "imst/tree.hpp"

namespace gen {

/// Labels in {-1, 0, 1}; continuous features on a small grid (with ties);
/// categorical features with 2 to 4 codes.
imst::FeatureTable random_table(imst::Rng& rng, std::size_t n, std::size_t p);

/// Non-negative n x d matrix of uniform entries.
Eigen::MatrixXd random_nonnegative(imst::Rng& rng, Eigen::Index n, Eigen::Index d);

/// Columns with mean 0, X^T X = (n - 1) I, so each column has unit sample sd.
Eigen::MatrixXd orthonormal_design(imst::Rng& rng, Eigen::Index n, Eigen::Index p);

std::vector<std::size_t> all_rows(std::size_t n);

/// Directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

}  // namespace gen
