#pragma once

#include "sspg/diff/tape.hpp"
#include "sspg/rng.hpp"

namespace sspg::envs {

using diff::Matrix;

struct StepResult {
  double reward = 0.0;
  Matrix next_state;  ///< 1 x state_dim
  bool done = true;
};

/// Episodic environment over the action cube [-1, 1]^action_dim.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Starts an episode and returns its first state (1 x state_dim).
  virtual Matrix reset(Rng& rng) = 0;
  virtual StepResult step(const Matrix& action, Rng& rng) = 0;
};

}  // namespace sspg::envs
