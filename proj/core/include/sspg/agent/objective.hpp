#pragma once

#include <functional>
#include <vector>

#include "sspg/policy/bt_policy.hpp"

namespace sspg::agent {

using diff::Matrix;
using diff::Tape;
using diff::Var;
using policy::TransitionKernel;

/// How policy gradients reach the transition parameters along a reasoning chain.
enum class GradientFlow {
  /// Only the first step uses the live parameters; later steps run a frozen
  /// copy and pass gradients back through the beliefs they consume.
  steady_state,
  /// Every step uses the live parameters, but each step's input belief is
  /// detached, so no gradient travels backwards along the chain.
  truncated_full,
};

struct PolicyLossOptions {
  int horizon = 1;  ///< beliefs a_0..a_horizon enter the objective
  double alpha = 0.0;
  GradientFlow flow = GradientFlow::steady_state;
  double log_density_floor = policy::kDefaultLogDensityFloor;
  /// Report log pi_ss(a_horizon) even when alpha is zero.
  bool want_final_log_density = false;
  /// Beliefs whose transitions form the steady-state mixture (each shaped like
  /// the seeds). Empty: the seed and the chain's own detached beliefs.
  std::vector<Matrix> component_sources;
};

/// Critic-side value of (state, action) rows on the tape, B x 1.
using ValueFn = std::function<Var(Tape& tape, const Var& states, const Var& actions)>;

struct PolicyLoss {
  Var loss;                  ///< -(sum of terms), 1 x 1
  std::vector<Var> terms;    ///< batch mean of Q(a_n) - alpha * log pi_ss(a_n), n = 0..horizon
  std::vector<Var> beliefs;  ///< a_0..a_horizon, each B x d
  Matrix final_log_density;  ///< B x 1 estimate at a_horizon; empty when not computed
};

/// Records the steady-state policy objective on `tape`.
///
/// a_0 = f(seeds, noise[0]) under `live` (trainable); a_{i+1} = f(a_i, noise[i+1])
/// under `frozen` (or `live` with detached inputs, see GradientFlow). The
/// steady-state log density of a_n is a mixture of transitions from the seed
/// and the detached chain beliefs a_0..a_horizon of the same row. `noise` holds horizon + 1 matrices shaped like `seeds`.
/// `states` has one row per seed or a single shared row.
PolicyLoss policy_gradient_loss(Tape& tape, const TransitionKernel& live, const TransitionKernel& frozen,
                                const ValueFn& value, const Matrix& states, const Matrix& seeds,
                                const std::vector<Matrix>& noise, const PolicyLossOptions& options);

}  // namespace sspg::agent
