#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sspg/agent/buffers.hpp"
#include "sspg/agent/objective.hpp"
#include "sspg/agent/temperature.hpp"
#include "sspg/critic/soft_q.hpp"
#include "sspg/diag/psrf.hpp"
#include "sspg/policy/bt_policy.hpp"

namespace sspg::agent {

struct AgentConfig {
  int state_dim = 1;
  int action_dim = 1;
  std::vector<int> policy_hidden{32, 32};
  std::vector<int> critic_hidden{32, 32};

  int initial_beliefs = 64;  ///< M, chains per act() call
  int memory_capacity = 64;  ///< C
  double rho = 0.99;
  double psrf_threshold = 1.1;
  int n_max = 64;
  double initial_n_hat = 1.0;
  diag::PsrfVariant psrf_variant = diag::PsrfVariant::literal;
  /// Draw the returned action from every simulated step instead of the last one.
  bool sample_full_history = false;

  double gamma = 0.99;
  double polyak = 0.995;
  double penalty = 0.0;
  int ensemble = 1;
  int batch_size = 256;
  double policy_lr = 3e-4;
  double critic_lr = 3e-4;
  int random_steps = 50;
  int learning_starts = 50;
  int utd = 1;

  double alpha = 1.0;
  bool auto_alpha = false;
  double target_entropy = 0.0;
  double alpha_lr = 1e-4;

  double log_std_min = -5.0;
  double log_std_max = 2.0;
  double log_density_floor = policy::kDefaultLogDensityFloor;
  GradientFlow flow = GradientFlow::steady_state;
  /// Evaluate the learning chain at the successor state (true) or the stored state.
  bool policy_at_next_state = true;

  /// Throws ContractError on any non-positive size or rate, or threshold <= 1.
  void validate() const;
  policy::BTPolicyConfig policy_config() const;
  critic::SoftQConfig critic_config() const;
};

struct ActStats {
  int steps = 0;             ///< reasoning steps simulated
  int converged_length = 0;  ///< N fed to the running mean: shortest passing length, or n_max
  bool converged = false;
  bool random = false;     ///< uniform exploration action, no reasoning
  double final_r_p = 0.0;  ///< R^p at the last evaluated length (inf when W was singular)
  std::vector<std::pair<int, double>> trace;  ///< (N, R^p) for every evaluated length
};

struct ActResult {
  Matrix action;  ///< 1 x action_dim
  ActStats stats;
};

struct LossReport {
  std::int64_t step = 0;
  double policy_loss = 0.0;
  double critic_loss = 0.0;
  double alpha = 0.0;
  double n_hat = 0.0;
  double mean_r_p = 0.0;  ///< mean final R^p of reasoning act() calls since the previous report; NaN if none
};

/// Steady-state policy gradient agent: acting by adaptive-length reasoning
/// chains and learning through the truncated steady-state objective.
class Agent {
 public:
  Agent(AgentConfig config, std::uint64_t init_seed);

  /// Selects an action for `state` (1 x state_dim).
  ActResult act(const Matrix& state, Rng& rng);

  /// The learning objective for a batch: chain seeded at `seeds`, horizon ceil(N_hat).
  PolicyLoss policy_gradient_loss(Tape& tape, const Matrix& states, const Matrix& seeds, Rng& rng) const;

  /// One policy, critic, target and temperature update on `batch`.
  LossReport learn_step(const TransitionBatch& batch, Rng& rng);

  /// Learning-chain truncation horizon, ceil(N_hat).
  int horizon() const;

  const AgentConfig& config() const noexcept { return config_; }
  const policy::BTPolicy& policy() const noexcept { return policy_; }
  policy::BTPolicy& policy() noexcept { return policy_; }
  const critic::SoftQEnsemble& critic() const noexcept { return critic_; }
  critic::SoftQEnsemble& critic() noexcept { return critic_; }
  const ShortTermActionMemory& memory() const noexcept { return memory_; }
  const diag::ConvergenceState& convergence() const noexcept { return convergence_; }
  const Temperature& temperature() const noexcept { return temperature_; }
  std::int64_t interactions() const noexcept { return interactions_; }
  std::int64_t learn_steps() const noexcept { return learn_steps_; }

  /// Checkpoint document: parameter stores plus acting state.
  nlohmann::json to_json() const;
  /// Restores an agent saved by to_json. Throws CheckpointError on mismatch.
  static Agent from_json(AgentConfig config, const nlohmann::json& doc);

 private:
  Agent(AgentConfig config, policy::BTPolicy policy, critic::SoftQEnsemble critic);

  AgentConfig config_;
  policy::BTPolicy policy_;
  critic::SoftQEnsemble critic_;
  ShortTermActionMemory memory_;
  diag::ConvergenceState convergence_;
  Temperature temperature_;
  diff::AdamConfig policy_adam_;
  std::int64_t interactions_ = 0;
  std::int64_t learn_steps_ = 0;
  double r_p_sum_ = 0.0;
  int r_p_count_ = 0;
};

}  // namespace sspg::agent
