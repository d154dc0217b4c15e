#include "sspg/agent/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sspg/diff/checkpoint.hpp"
#include "sspg/error.hpp"

namespace sspg::agent {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ContractError(std::string("AgentConfig: ") + what);
}

double psrf_or_inf(const policy::ChainHistory& chain, diag::PsrfVariant variant) {
  try {
    return diag::psrf(chain, variant).r_p;
  } catch (const DegenerateCovarianceError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

void AgentConfig::validate() const {
  require(state_dim > 0 && action_dim > 0, "dimensions must be positive");
  require(initial_beliefs >= 2, "initial_beliefs must be >= 2");
  require(memory_capacity >= 1, "memory_capacity must be positive");
  require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
  require(psrf_threshold > 1.0, "psrf_threshold must be > 1");
  require(n_max >= 2, "n_max must be >= 2");
  require(initial_n_hat >= 1.0, "initial_n_hat must be >= 1");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(polyak >= 0.0 && polyak < 1.0, "polyak must lie in [0, 1)");
  require(penalty >= 0.0, "penalty must be >= 0");
  require(ensemble >= 1, "ensemble must be >= 1");
  require(batch_size >= 1, "batch_size must be positive");
  require(policy_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
  require(random_steps >= 0 && learning_starts >= 0, "exploration counts must be >= 0");
  require(utd >= 1, "utd must be >= 1");
  require(alpha > 0.0, "alpha must be positive");
  require(alpha_lr > 0.0, "alpha_lr must be positive");
  require(log_std_min < log_std_max, "log_std_min must be < log_std_max");
}

policy::BTPolicyConfig AgentConfig::policy_config() const {
  return policy::BTPolicyConfig{state_dim, action_dim, policy_hidden, log_std_min, log_std_max};
}

critic::SoftQConfig AgentConfig::critic_config() const {
  critic::SoftQConfig c;
  c.state_dim = state_dim;
  c.action_dim = action_dim;
  c.hidden = critic_hidden;
  c.ensemble = ensemble;
  c.penalty = penalty;
  c.polyak = polyak;
  c.adam.learning_rate = critic_lr;
  return c;
}

namespace {

policy::BTPolicy initial_policy(const AgentConfig& c, std::uint64_t seed) {
  Rng rng = substream(seed, "init-policy");
  return policy::BTPolicy(c.policy_config(), rng);
}

critic::SoftQEnsemble initial_critic(const AgentConfig& c, std::uint64_t seed) {
  Rng rng = substream(seed, "init-critic");
  return critic::SoftQEnsemble(c.critic_config(), rng);
}

}  // namespace

Agent::Agent(AgentConfig config, std::uint64_t init_seed)
    : Agent(config, initial_policy(config, init_seed), initial_critic(config, init_seed)) {}

Agent::Agent(AgentConfig config, policy::BTPolicy policy, critic::SoftQEnsemble critic)
    : config_(std::move(config)),
      policy_(std::move(policy)),
      critic_(std::move(critic)),
      memory_(config_.memory_capacity, config_.action_dim) {
  config_.validate();
  convergence_ = diag::ConvergenceState{config_.initial_n_hat, config_.rho, config_.psrf_threshold, config_.n_max};
  convergence_.validate();
  temperature_ = config_.auto_alpha
                     ? Temperature::automatic(config_.alpha, config_.target_entropy, config_.alpha_lr)
                     : Temperature::fixed(config_.alpha);
  policy_adam_.learning_rate = config_.policy_lr;
}

int Agent::horizon() const { return static_cast<int>(std::ceil(convergence_.n_hat - 1e-12)); }

ActResult Agent::act(const Matrix& state, Rng& rng) {
  if (state.rows() != 1 || state.cols() != config_.state_dim) {
    throw DimensionError("Agent::act: expected a 1 x " + std::to_string(config_.state_dim) + " state");
  }
  ++interactions_;
  ActResult out;
  if (interactions_ <= config_.random_steps) {
    out.action = uniform_matrix(rng, 1, config_.action_dim, -1.0, 1.0);
    out.stats.random = true;
    return out;
  }

  const Matrix start = memory_.draw(config_.initial_beliefs, rng);
  const int first = std::clamp(static_cast<int>(std::floor(convergence_.n_hat)), 2, config_.n_max);
  policy::ChainHistory chain = policy::simulate_chain(policy_, state, start, first, rng);

  ActStats& st = out.stats;
  double r = psrf_or_inf(chain, config_.psrf_variant);
  st.trace.emplace_back(chain.length(), r);
  int converged_length = 0;
  if (r < config_.psrf_threshold) {
    // Backtrack to the shortest prefix that already passes.
    converged_length = diag::min_converged_length(chain, convergence_, config_.psrf_variant).value_or(chain.length());
  } else {
    while (chain.length() < config_.n_max) {
      policy::extend_chain(chain, policy_, 1, rng);
      r = psrf_or_inf(chain, config_.psrf_variant);
      st.trace.emplace_back(chain.length(), r);
      if (r < config_.psrf_threshold) {
        converged_length = chain.length();
        break;
      }
    }
  }
  st.converged = converged_length > 0;
  st.steps = chain.length();
  st.final_r_p = r;
  st.converged_length = st.converged ? converged_length : config_.n_max;
  convergence_ = diag::update_running_steps(convergence_, st.converged_length);
  if (std::isfinite(r)) {
    r_p_sum_ += r;
    ++r_p_count_;
  }

  for (const Matrix& step : chain.steps) memory_.push(step);

  if (config_.sample_full_history) {
    const std::size_t k = uniform_index(rng, chain.steps.size());
    out.action = chain.steps[k].row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(start.rows()))));
  } else {
    out.action = chain.steps.back().row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(start.rows()))));
  }
  return out;
}

PolicyLoss Agent::policy_gradient_loss(Tape& tape, const Matrix& states, const Matrix& seeds, Rng& rng) const {
  const int n = horizon();
  std::vector<Matrix> noise;
  noise.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) noise.push_back(normal_matrix(rng, seeds.rows(), seeds.cols()));
  PolicyLossOptions opts;
  opts.horizon = n;
  opts.alpha = temperature_.alpha();
  opts.flow = config_.flow;
  opts.log_density_floor = config_.log_density_floor;
  opts.want_final_log_density = true;
  const ValueFn q = [this](Tape& t, const Var& s, const Var& a) {
    return critic_.aggregate(t, s, a, diff::Binding::stopped);
  };
  return agent::policy_gradient_loss(tape, policy_, policy_, q, states, seeds, noise, opts);
}

LossReport Agent::learn_step(const TransitionBatch& batch, Rng& rng) {
  const Matrix& chain_states = config_.policy_at_next_state ? batch.next_states : batch.states;

  Tape tape;
  const PolicyLoss pl = policy_gradient_loss(tape, chain_states, batch.actions, rng);
  const double policy_loss = pl.loss.scalar();
  if (!std::isfinite(policy_loss)) {
    std::ostringstream os;
    os << "loss=" << policy_loss << " horizon=" << horizon() << " alpha=" << temperature_.alpha();
    throw NumericError("learn_step: non-finite policy loss", os.str());
  }
  const diff::Gradients grads = tape.backward(pl.loss);
  diff::adam_step(policy_.params(), grads, policy_adam_);

  const Matrix next_actions = pl.beliefs.back().value();
  const Matrix& log_pi = pl.final_log_density;
  const critic::BellmanStats cs = critic_.bellman_update(
      batch.states, batch.actions,
      critic_.bellman_target(batch.rewards, batch.done, config_.gamma, batch.next_states, next_actions, log_pi,
                             temperature_.alpha()));
  critic_.polyak_update();
  temperature_ = temperature_update(temperature_, log_pi.mean());

  ++learn_steps_;
  LossReport rep;
  rep.step = learn_steps_;
  rep.policy_loss = policy_loss;
  rep.critic_loss = cs.loss;
  rep.alpha = temperature_.alpha();
  rep.n_hat = convergence_.n_hat;
  rep.mean_r_p = r_p_count_ > 0 ? r_p_sum_ / r_p_count_ : std::numeric_limits<double>::quiet_NaN();
  r_p_sum_ = 0.0;
  r_p_count_ = 0;
  return rep;
}

nlohmann::json Agent::to_json() const {
  using nlohmann::json;
  const Matrix mem = memory_.contents();
  json memory = {{"rows", mem.rows()}, {"cols", mem.cols()}, {"data", json::array()}};
  for (Eigen::Index i = 0; i < mem.rows(); ++i) {
    for (Eigen::Index j = 0; j < mem.cols(); ++j) memory["data"].push_back(mem(i, j));
  }
  return json{{"version", diff::kCheckpointVersion},
              {"stores",
               {{"policy", diff::store_to_json(policy_.params())},
                {"critic", diff::store_to_json(critic_.online())},
                {"critic_target", diff::store_to_json(critic_.delayed())}}},
              {"state",
               {{"n_hat", convergence_.n_hat},
                {"log_alpha", temperature_.log_alpha},
                {"interactions", interactions_},
                {"learn_steps", learn_steps_},
                {"memory", memory}}}};
}

Agent Agent::from_json(AgentConfig config, const nlohmann::json& doc) {
  diff::require_checkpoint_version(doc);
  try {
    const auto& stores = doc.at("stores");
    policy::BTPolicy pol(config.policy_config(), diff::store_from_json(stores.at("policy")));
    critic::SoftQEnsemble crit(config.critic_config(), diff::store_from_json(stores.at("critic")),
                               diff::store_from_json(stores.at("critic_target")));
    Agent agent(std::move(config), std::move(pol), std::move(crit));
    const auto& st = doc.at("state");
    agent.convergence_.n_hat = st.at("n_hat").get<double>();
    agent.temperature_.log_alpha = st.at("log_alpha").get<double>();
    agent.interactions_ = st.at("interactions").get<std::int64_t>();
    agent.learn_steps_ = st.at("learn_steps").get<std::int64_t>();
    const auto& mem = st.at("memory");
    const auto rows = mem.at("rows").get<Eigen::Index>(), cols = mem.at("cols").get<Eigen::Index>();
    const auto data = mem.at("data").get<std::vector<double>>();
    if (cols != agent.config_.action_dim || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw CheckpointError("checkpoint: memory block has the wrong shape");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
    }
    agent.memory_.push(m);
    agent.convergence_.validate();
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  } catch (const ContractError& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace sspg::agent
