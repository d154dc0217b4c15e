#pragma once

#include <vector>

#include "sspg/envs/environment.hpp"
#include "sspg/policy/bt_policy.hpp"

namespace sspg::envs {

/// Single-step task: the action is a position in the box [-1, 1]^d and the
/// reward is minus the scaled distance to the nearest goal. Observations are
/// a constant single-entry token.
class PositionalBandit final : public Environment {
 public:
  /// `goals` is G x d, every coordinate inside the box. Throws ContractError otherwise.
  explicit PositionalBandit(Matrix goals, double reward_scale = 1.0);

  /// 1-D task with goals at -0.55 and +0.55.
  static PositionalBandit line();
  /// `count` goals equally spaced on a circle of `radius` around the origin, the first on the +y axis.
  static PositionalBandit circle(int count, double radius = 0.6);

  int state_dim() const override { return 1; }
  int action_dim() const override { return static_cast<int>(goals_.cols()); }
  int goal_count() const { return static_cast<int>(goals_.rows()); }
  const Matrix& goals() const noexcept { return goals_; }
  double reward_scale() const noexcept { return reward_scale_; }

  Matrix reset(Rng& rng) override;
  /// Out-of-box actions are clipped to the box with a warning.
  StepResult step(const Matrix& action, Rng& rng) override;

  /// -scale * min_g ||a - g|| for a 1 x d action, without clipping.
  double reward(const Matrix& action) const;
  /// Index of the goal closest to `point` (1 x d); ties go to the lower index.
  int nearest_goal(const Matrix& point) const;

 private:
  Matrix goals_;
  double reward_scale_;
};

struct GoalFrequencies {
  std::vector<double> per_goal;  ///< fraction of actions within the radius of each goal
  double outside = 0.0;          ///< fraction farther than the radius from every goal
};

/// Assigns every action row to its nearest goal if it lies within `radius`.
/// Fractions are over all rows, so per_goal and outside sum to 1.
GoalFrequencies goal_visit_frequencies(const Matrix& actions, const PositionalBandit& env, double radius);

struct QuantizedTransitions {
  Matrix probabilities;       ///< G x G, row g: P(next belief nearest goal h | belief near goal g)
  std::vector<bool> defined;  ///< false when no belief could be placed near goal g (row is NaN)
};

/// Samples `samples` beliefs uniformly in the ball of `radius` around each goal
/// (restricted to the open cube), applies one transition, assigns every
/// output to its nearest goal and normalizes the counts per row.
QuantizedTransitions quantized_transition_matrix(const policy::TransitionKernel& kernel, const Matrix& state,
                                                 const PositionalBandit& env, double radius, int samples,
                                                 Rng& rng);

}  // namespace sspg::envs
