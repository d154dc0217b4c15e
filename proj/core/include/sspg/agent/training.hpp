#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "sspg/agent/agent.hpp"
#include "sspg/envs/environment.hpp"

namespace sspg::agent {

/// Named random streams derived from one run seed.
struct RunStreams {
  Rng env;
  Rng policy_noise;
  Rng buffer_sampling;

  explicit RunStreams(std::uint64_t seed);
};

struct TrainingConfig {
  std::int64_t total_steps = 1000;
  std::size_t replay_capacity = 1'000'000;
};

/// What happened in one environment step of training.
struct StepRecord {
  std::int64_t step = 0;  ///< 1-based environment step
  double reward = 0.0;
  bool episode_end = false;
  ActStats act;
  std::vector<LossReport> losses;  ///< one per learn step taken after this interaction (UTD)
};

/// Interleaves acting and learning for `config.total_steps` environment steps.
/// Learning starts once the buffer holds max(batch_size, learning_starts) transitions.
void train(Agent& agent, envs::Environment& env, const TrainingConfig& config, RunStreams& streams,
           const std::function<void(const StepRecord&)>& on_step = {});

}  // namespace sspg::agent
