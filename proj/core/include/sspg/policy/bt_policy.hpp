#pragma once

#include <vector>

#include "sspg/diff/mlp.hpp"
#include "sspg/diff/params.hpp"
#include "sspg/diff/tape.hpp"
#include "sspg/rng.hpp"

namespace sspg::policy {

using diff::Binding;
using diff::Matrix;
using diff::ParamStore;
using diff::Tape;
using diff::Var;

/// Largest |a| a belief may take; squashed samples are kept this far inside the cube.
inline constexpr double kCubeMargin = 1e-12;
/// Stored beliefs are clipped to |a| <= 1 - kAtanhClip before density evaluation.
inline constexpr double kAtanhClip = 1e-6;
/// Default floor for log steady-state density estimates.
inline constexpr double kDefaultLogDensityFloor = -100.0;

/// Pre-squash Gaussian parameters of a batch of transitions (both B x d).
struct Heads {
  Var mean;
  Var log_std;
};

/// Plain-matrix counterpart of Heads.
struct HeadValues {
  Matrix mean;
  Matrix log_std;
};

/// A reparameterizable transition kernel a' = g(mean + exp(log_std) * eps),
/// where g is tanh for squashed kernels and the identity otherwise.
class TransitionKernel {
 public:
  virtual ~TransitionKernel() = default;

  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual bool squashed() const { return true; }

  /// Heads for each row of (states, actions). `states` has one row per batch
  /// element or a single row shared by the whole batch.
  virtual Heads heads(Tape& tape, const Var& states, const Var& actions, Binding binding) const = 0;
};

struct BTPolicyConfig {
  int state_dim = 1;
  int action_dim = 1;
  std::vector<int> hidden{32, 32};
  double log_std_min = -5.0;
  double log_std_max = 2.0;

  void validate() const;
};

/// Belief-transition policy: an MLP on [s, a] producing a squashed Gaussian
/// over the next action-belief. log_std is squashed smoothly into
/// [log_std_min, log_std_max], which keeps the transition density strictly
/// positive on the open cube.
class BTPolicy final : public TransitionKernel {
 public:
  static constexpr const char* kPrefix = "policy";

  /// Randomly initialized network.
  BTPolicy(BTPolicyConfig config, Rng& init_rng);
  /// Network with the given parameters (e.g. restored from a checkpoint).
  BTPolicy(BTPolicyConfig config, ParamStore params);
  /// All-zero network: mean 0 and log_std at the middle of the clamp range.
  static BTPolicy zeros(BTPolicyConfig config);

  int state_dim() const override { return config_.state_dim; }
  int action_dim() const override { return config_.action_dim; }

  Heads heads(Tape& tape, const Var& states, const Var& actions, Binding binding) const override;

  /// Raw network output that maps to `log_std` (inverse of the soft clamp).
  double raw_for_log_std(double log_std) const;

  const BTPolicyConfig& config() const noexcept { return config_; }
  const diff::MlpSpec& spec() const noexcept { return spec_; }
  const ParamStore& params() const noexcept { return params_; }
  ParamStore& params() noexcept { return params_; }

 private:
  BTPolicyConfig config_;
  diff::MlpSpec spec_;
  ParamStore params_;
};

/// Batch of action-beliefs, one per row, every entry strictly inside (-1, 1).
class ActionBeliefBatch {
 public:
  /// Throws ContractError when an entry is outside the open cube.
  explicit ActionBeliefBatch(Matrix beliefs);

  const Matrix& matrix() const noexcept { return beliefs_; }
  Eigen::Index size() const noexcept { return beliefs_.rows(); }
  Eigen::Index dim() const noexcept { return beliefs_.cols(); }

 private:
  Matrix beliefs_;
};

/// Record of a simulated reasoning chain: M parallel chains over N steps.
struct ChainHistory {
  Matrix state;               ///< 1 x state_dim
  Matrix start;               ///< a_0, M x d
  std::vector<Matrix> steps;  ///< a_1..a_N, each M x d
  std::vector<Matrix> noise;  ///< eps_1..eps_N used to produce `steps`

  int length() const noexcept { return static_cast<int>(steps.size()); }
  Eigen::Index chains() const noexcept { return start.rows(); }
  Eigen::Index dim() const noexcept { return start.cols(); }

  /// The first n steps (same start and state).
  ChainHistory prefix(int n) const;
  /// Every belief in the chain including the start batch, stacked ((N+1)M x d).
  Matrix all_beliefs() const;
  /// Throws ContractError when batches disagree in shape or the chain is empty.
  void validate() const;
};

/// Repeats a 1 x k row into an n x k matrix.
Matrix repeat_rows(const Matrix& row, Eigen::Index n);

// ---------------------------------------------------------------------------
// Differentiable building blocks (used by the learning objective).

/// a' = g(mean + exp(log_std) * noise), rows of `noise` matching `actions`.
Var transition_sample(Tape& tape, const TransitionKernel& kernel, const Var& states,
                      const Var& actions, const Var& noise, Binding binding);

/// Point prepared for repeated density evaluation: the pre-squash value and the
/// change-of-variables correction sum_j log(1 - x_j^2) (zero when unsquashed).
struct PreparedPoint {
  Var pre;
  Var log_jacobian;  ///< B x 1
};

/// Clips to |x| <= 1 - kAtanhClip (squashed kernels) and precomputes atanh.
PreparedPoint prepare_point(const Var& x, bool squashed);

/// Per-row log density of the prepared point under `heads` (B x 1).
Var log_density(const PreparedPoint& x, const Heads& heads);

/// log((1/K) sum_k exp(log_density(x, components[k]))), floored at `floor` (B x 1).
Var mixture_log_density(const PreparedPoint& x, const std::vector<Heads>& components,
                        double floor = kDefaultLogDensityFloor);

// ---------------------------------------------------------------------------
// Plain evaluation.

/// Heads for each row of `actions` at state `state` (1 x state_dim).
HeadValues evaluate_heads(const TransitionKernel& kernel, const Matrix& state, const Matrix& actions);

/// One reasoning step for every row of `actions`, using externally drawn
/// standard-normal `noise` (same shape as `actions`). Throws NumericError on
/// non-finite network output.
Matrix transition_sample(const TransitionKernel& kernel, const Matrix& state, const Matrix& actions,
                         const Matrix& noise);

/// log pi_b(next | action, state) for single beliefs (1 x d rows). Entries of
/// `next` beyond 1 - kAtanhClip are clipped with a warning.
double log_prob(const TransitionKernel& kernel, const Matrix& state, const Matrix& action,
                const Matrix& next);

/// Simulates `steps` reasoning steps from `start`, drawing noise from `rng`.
ChainHistory simulate_chain(const TransitionKernel& kernel, const Matrix& state, const Matrix& start,
                            int steps, Rng& rng);

/// Appends `steps` further reasoning steps to `chain`.
void extend_chain(ChainHistory& chain, const TransitionKernel& kernel, int steps, Rng& rng);

/// Final beliefs of `samples` independent chains run `burn_in` steps from
/// uniform starts: approximate draws from the steady-state policy.
Matrix sample_steady_state(const TransitionKernel& kernel, const Matrix& state, int samples, int burn_in, Rng& rng);

/// Nested Monte-Carlo estimate of the steady-state log density at `action`
/// (1 x d): log of the mean transition density from each belief in
/// `components` (K x d). Floored at `floor` with a warning on underflow.
double ss_log_prob_estimate(const TransitionKernel& kernel, const Matrix& state, const Matrix& action,
                            const Matrix& components, double floor = kDefaultLogDensityFloor);

/// Same estimate with every belief of `chain` (start batch included) as a component.
double ss_log_prob_estimate(const TransitionKernel& kernel, const Matrix& state, const Matrix& action,
                            const ChainHistory& chain, double floor = kDefaultLogDensityFloor);

}  // namespace sspg::policy
