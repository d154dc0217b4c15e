#pragma once

#include <vector>

#include "sspg/diff/mlp.hpp"
#include "sspg/diff/params.hpp"
#include "sspg/rng.hpp"

namespace sspg::critic {

using diff::Binding;
using diff::Matrix;
using diff::ParamStore;
using diff::Tape;
using diff::Var;

struct SoftQConfig {
  int state_dim = 1;
  int action_dim = 1;
  std::vector<int> hidden{32, 32};
  int ensemble = 1;      ///< K
  double penalty = 0.0;  ///< beta: aggregate = mean - beta * std over members
  double polyak = 0.995; ///< tau: delayed <- tau * delayed + (1 - tau) * online
  diff::AdamConfig adam{};

  void validate() const;
};

/// Per-member values (B x K) and their penalized aggregate (B x 1).
struct QValues {
  Matrix members;
  Matrix aggregate;
};

struct BellmanStats {
  double loss = 0.0;  ///< mean over members of the batch MSE before the update
};

/// Ensemble of soft Q-networks with Polyak-averaged delayed copies.
class SoftQEnsemble {
 public:
  static constexpr const char* kOnlinePrefix = "critic";
  static constexpr const char* kDelayedPrefix = "critic_target";

  SoftQEnsemble(SoftQConfig config, Rng& init_rng);
  /// Restores from stores using the kOnlinePrefix / kDelayedPrefix names.
  SoftQEnsemble(SoftQConfig config, ParamStore online, ParamStore delayed);

  /// Member prefix, e.g. "critic/q0".
  static std::string member_prefix(const char* root, int k);

  /// Evaluates every (state row, action row) pair. `states` may be a single row.
  QValues q_eval(const Matrix& states, const Matrix& actions, bool use_delayed) const;

  /// Penalized aggregate on the tape (B x 1) with the given parameter binding.
  Var aggregate(Tape& tape, const Var& states, const Var& actions, Binding binding,
                bool use_delayed = false) const;

  /// r + gamma * (1 - done) * (Q'(s', a').aggregate - alpha * log_pi_ss); gradient-free.
  /// Every argument is a column with one row per transition (states/actions: B x dim).
  Matrix bellman_target(const Matrix& rewards, const Matrix& done, double gamma, const Matrix& next_states,
                        const Matrix& next_actions, const Matrix& next_log_pi_ss, double alpha) const;

  /// One Adam step per member on the mean squared error against `targets` (B x 1).
  /// Throws NumericError (without updating) when the loss is not finite.
  BellmanStats bellman_update(const Matrix& states, const Matrix& actions, const Matrix& targets);

  /// Squared-error loss of every member summed, recorded on `tape` (parameters trainable).
  Var bellman_loss(Tape& tape, const Matrix& states, const Matrix& actions, const Matrix& targets) const;

  void polyak_update();

  const SoftQConfig& config() const noexcept { return config_; }
  const ParamStore& online() const noexcept { return online_; }
  ParamStore& online() noexcept { return online_; }
  const ParamStore& delayed() const noexcept { return delayed_; }
  ParamStore& delayed() noexcept { return delayed_; }
  const diff::MlpSpec& spec() const noexcept { return spec_; }

 private:
  Var members(Tape& tape, const Var& states, const Var& actions, Binding binding, bool use_delayed) const;

  SoftQConfig config_;
  diff::MlpSpec spec_;
  ParamStore online_;
  ParamStore delayed_;
};

/// Copies `online` into a store whose names use `to_prefix` instead of `from_prefix`.
ParamStore renamed_copy(const ParamStore& online, const std::string& from_prefix, const std::string& to_prefix);

}  // namespace sspg::critic
