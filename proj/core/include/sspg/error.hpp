#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sspg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf. `detail` carries the offending values.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::string detail)
      : Error(what + ": " + detail), detail_(std::move(detail)) {}
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
};

/// Not enough steps or chains for a convergence statistic.
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

/// Within-chain covariance is singular even after regularization.
class DegenerateCovarianceError : public Error {
 public:
  DegenerateCovarianceError(const std::string& what, std::vector<int> dims)
      : Error(what), dims_(std::move(dims)) {}
  const std::vector<int>& degenerate_dims() const noexcept { return dims_; }

 private:
  std::vector<int> dims_;
};

/// Checkpoint document could not be read or has the wrong version.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Emits a warning on stderr unless warnings are silenced.
void warn(const std::string& message);

/// Globally enable or disable `warn` output. Returns the previous setting.
bool set_warnings_enabled(bool enabled);

}  // namespace sspg
