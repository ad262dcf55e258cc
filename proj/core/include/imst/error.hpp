#pragma once

#include <stdexcept>
#include <string>

namespace imst {

// Exception hierarchy. The CLI maps each kind onto a distinct exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or argument (bad k, fold count, fraction, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data. Carries the 1-based line/row when known.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, long line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// A pipeline stage was asked to run before the artifacts it consumes exist
/// (or they were produced under a different configuration).
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

/// Factor or coefficient values became NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace imst
