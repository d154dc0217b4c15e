#include "sspg/envs/bandit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sspg/error.hpp"

namespace sspg::envs {

PositionalBandit::PositionalBandit(Matrix goals, double reward_scale)
    : goals_(std::move(goals)), reward_scale_(reward_scale) {
  if (goals_.rows() < 1 || goals_.cols() < 1) throw ContractError("PositionalBandit: need at least one goal");
  if (!goals_.allFinite() || (goals_.array().abs() > 1.0).any()) {
    throw ContractError("PositionalBandit: goals must lie inside [-1, 1]^d");
  }
  if (!(reward_scale > 0.0)) throw ContractError("PositionalBandit: reward scale must be positive");
}

PositionalBandit PositionalBandit::line() {
  Matrix g(2, 1);
  g << -0.55, 0.55;
  return PositionalBandit(g);
}

PositionalBandit PositionalBandit::circle(int count, double radius) {
  if (count < 1) throw ContractError("PositionalBandit::circle: need at least one goal");
  Matrix g(count, 2);
  for (int k = 0; k < count; ++k) {
    const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / count;
    g(k, 0) = radius * std::cos(angle);
    g(k, 1) = radius * std::sin(angle);
  }
  return PositionalBandit(g);
}

Matrix PositionalBandit::reset(Rng&) { return Matrix::Zero(1, 1); }

double PositionalBandit::reward(const Matrix& action) const {
  if (action.rows() != 1 || action.cols() != goals_.cols()) {
    throw DimensionError("PositionalBandit: action must be 1 x " + std::to_string(goals_.cols()));
  }
  const double dist = (goals_.rowwise() - action.row(0)).rowwise().norm().minCoeff();
  return -reward_scale_ * dist;
}

int PositionalBandit::nearest_goal(const Matrix& point) const {
  Eigen::Index best = 0;
  (goals_.rowwise() - point.row(0)).rowwise().squaredNorm().minCoeff(&best);
  return static_cast<int>(best);
}

StepResult PositionalBandit::step(const Matrix& action, Rng&) {
  Matrix a = action;
  if ((a.array().abs() > 1.0).any()) {
    std::ostringstream os;
    os << "PositionalBandit: action " << action << " outside the box; clipped";
    warn(os.str());
    a = a.cwiseMax(-1.0).cwiseMin(1.0);
  }
  return StepResult{reward(a), Matrix::Zero(1, 1), true};
}

GoalFrequencies goal_visit_frequencies(const Matrix& actions, const PositionalBandit& env, double radius) {
  if (actions.rows() == 0) throw ContractError("goal_visit_frequencies: no episodes");
  if (actions.cols() != env.action_dim()) throw DimensionError("goal_visit_frequencies: action width mismatch");
  GoalFrequencies out;
  out.per_goal.assign(static_cast<std::size_t>(env.goal_count()), 0.0);
  const double w = 1.0 / static_cast<double>(actions.rows());
  for (Eigen::Index i = 0; i < actions.rows(); ++i) {
    const Matrix a = actions.row(i);
    const int g = env.nearest_goal(a);
    if ((a - env.goals().row(g)).norm() <= radius) {
      out.per_goal[static_cast<std::size_t>(g)] += w;
    } else {
      out.outside += w;
    }
  }
  return out;
}

QuantizedTransitions quantized_transition_matrix(const policy::TransitionKernel& kernel, const Matrix& state,
                                                 const PositionalBandit& env, double radius, int samples,
                                                 Rng& rng) {
  if (env.goal_count() < 2) throw ContractError("quantized_transition_matrix: need at least two goals");
  if (samples < 1) throw ContractError("quantized_transition_matrix: samples must be positive");
  if (!(radius > 0.0)) throw ContractError("quantized_transition_matrix: radius must be positive");
  const int g_count = env.goal_count();
  const int d = env.action_dim();
  const double lim = 1.0 - policy::kAtanhClip;
  QuantizedTransitions out{Matrix::Zero(g_count, g_count), std::vector<bool>(static_cast<std::size_t>(g_count), true)};
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  for (int g = 0; g < g_count; ++g) {
    Matrix beliefs(samples, d);
    int have = 0;
    const long max_tries = 1000L * samples;
    for (long tries = 0; have < samples && tries < max_tries; ++tries) {
      // Uniform in the d-ball: Gaussian direction, radius scaled by U^(1/d).
      Eigen::RowVectorXd dir(d);
      for (int j = 0; j < d; ++j) dir(j) = normal(rng);
      const double n = dir.norm();
      if (n == 0.0) continue;
      const Eigen::RowVectorXd x = env.goals().row(g) + dir * (radius * std::pow(unit(rng), 1.0 / d) / n);
      if ((x.array().abs() >= lim).any()) continue;
      beliefs.row(have++) = x;
    }
    if (have < samples) {
      out.defined[static_cast<std::size_t>(g)] = false;
      out.probabilities.row(g).setConstant(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const Matrix next = policy::transition_sample(kernel, state, beliefs, normal_matrix(rng, samples, d));
    for (int i = 0; i < samples; ++i) out.probabilities(g, env.nearest_goal(next.row(i))) += 1.0;
    out.probabilities.row(g) /= static_cast<double>(samples);
  }
  return out;
}

}  // namespace sspg::envs
