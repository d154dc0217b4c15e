#include "sspg/agent/training.hpp"

#include <algorithm>

#include "sspg/error.hpp"

namespace sspg::agent {

RunStreams::RunStreams(std::uint64_t seed)
    : env(substream(seed, "env")),
      policy_noise(substream(seed, "policy-noise")),
      buffer_sampling(substream(seed, "buffer-sampling")) {}

void train(Agent& agent, envs::Environment& env, const TrainingConfig& config, RunStreams& streams,
           const std::function<void(const StepRecord&)>& on_step) {
  const AgentConfig& ac = agent.config();
  if (env.state_dim() != ac.state_dim || env.action_dim() != ac.action_dim) {
    throw DimensionError("train: environment and agent dimensions disagree");
  }
  ReplayBuffer replay(config.replay_capacity);
  const std::size_t ready = static_cast<std::size_t>(std::max(ac.batch_size, ac.learning_starts));
  Matrix state = env.reset(streams.env);
  for (std::int64_t t = 1; t <= config.total_steps; ++t) {
    StepRecord rec;
    rec.step = t;
    ActResult act = agent.act(state, streams.policy_noise);
    envs::StepResult res = env.step(act.action, streams.env);
    rec.reward = res.reward;
    rec.episode_end = res.done;
    rec.act = std::move(act.stats);
    replay.push(Transition{state, act.action, res.reward, res.next_state, res.done});
    state = res.done ? env.reset(streams.env) : res.next_state;

    if (replay.size() >= ready) {
      for (int u = 0; u < ac.utd; ++u) {
        const TransitionBatch batch = replay.sample(static_cast<std::size_t>(ac.batch_size), streams.buffer_sampling);
        rec.losses.push_back(agent.learn_step(batch, streams.policy_noise));
      }
    }
    if (on_step) on_step(rec);
  }
}

}  // namespace sspg::agent
