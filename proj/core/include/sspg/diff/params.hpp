#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sspg/diff/tape.hpp"

namespace sspg::diff {

/// A named tensor plus its Adam moment estimates.
struct Parameter {
  Matrix value;
  Matrix first_moment;
  Matrix second_moment;
};

/// Owns a set of named parameters and the optimizer state that updates them.
class ParamStore {
 public:
  /// Adds a parameter with zeroed moments. Throws ContractError on duplicates.
  void add(const std::string& name, Matrix value);

  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const Matrix& value(const std::string& name) const;
  Matrix& mutable_value(const std::string& name);
  const Parameter& parameter(const std::string& name) const;
  Parameter& mutable_parameter(const std::string& name);

  std::vector<std::string> names() const;
  std::size_t size() const noexcept { return params_.size(); }
  /// Total number of scalars across all parameters.
  Eigen::Index scalar_count() const;

  std::int64_t step() const noexcept { return step_; }
  void set_step(std::int64_t step);
  void increment_step() noexcept { ++step_; }

  const std::map<std::string, Parameter>& entries() const noexcept { return params_; }

 private:
  std::map<std::string, Parameter> params_;
  std::int64_t step_ = 0;
};

/// How a forward pass sees stored parameters.
enum class Binding {
  trainable,  ///< named leaves that collect gradients
  frozen,     ///< anonymous constants (a fixed copy of the current values)
  stopped,    ///< named leaves whose consumers are gradient-stopped
};

/// Places `store[name]` on the tape according to `binding`.
Var bind(Tape& tape, const ParamStore& store, const std::string& name, Binding binding);

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of every parameter in `store`.
/// Every parameter must have an entry in `grads` (extra entries are ignored).
void adam_step(ParamStore& store, const Gradients& grads, const AdamConfig& config);

/// Restricts `grads` to the entries whose names start with `prefix`.
Gradients with_prefix(const Gradients& grads, const std::string& prefix);

}  // namespace sspg::diff
