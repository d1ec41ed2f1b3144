#pragma once

#include <stdexcept>
#include <string>

namespace sdsr {

// Process exit codes, also used as error categories inside the library.
// 0 ok, 2 schema violation, 3 missing input, 4 training divergence,
// 5 stale artifact (config hash mismatch). 1 is the generic failure bucket.
enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kMissingInput = 3,
  kDivergence = 4,
  kStaleArtifact = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class MissingInputError : public Error {
 public:
  explicit MissingInputError(const std::string& what) : Error(ExitCode::kMissingInput, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error(ExitCode::kDivergence, what) {}
};

class StaleArtifactError : public Error {
 public:
  explicit StaleArtifactError(const std::string& what) : Error(ExitCode::kStaleArtifact, what) {}
};

// Shape / dimension contract violations.
class SizingError : public Error {
 public:
  explicit SizingError(const std::string& what) : Error(ExitCode::kFailure, what) {}
};

// NaN / Inf detected where finite values are required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ExitCode::kFailure, what) {}
};

}  // namespace sdsr
