#include "sspg/critic/soft_q.hpp"

#include <cmath>
#include <sstream>

#include "sspg/diff/ops.hpp"
#include "sspg/error.hpp"

namespace sspg::critic {

namespace d = sspg::diff;

void SoftQConfig::validate() const {
  if (state_dim <= 0 || action_dim <= 0) throw ContractError("SoftQConfig: dimensions must be positive");
  if (ensemble < 1) throw ContractError("SoftQConfig: ensemble size must be >= 1");
  if (!(penalty >= 0.0)) throw ContractError("SoftQConfig: penalty must be >= 0");
  if (!(polyak >= 0.0 && polyak < 1.0)) throw ContractError("SoftQConfig: polyak coefficient must lie in [0, 1)");
}

std::string SoftQEnsemble::member_prefix(const char* root, int k) {
  return std::string(root) + "/q" + std::to_string(k);
}

ParamStore renamed_copy(const ParamStore& online, const std::string& from_prefix, const std::string& to_prefix) {
  ParamStore out;
  for (const auto& [name, p] : online.entries()) {
    if (name.compare(0, from_prefix.size(), from_prefix) != 0) {
      throw ContractError("renamed_copy: '" + name + "' lacks prefix '" + from_prefix + "'");
    }
    out.add(to_prefix + name.substr(from_prefix.size()), p.value);
  }
  return out;
}

SoftQEnsemble::SoftQEnsemble(SoftQConfig config, Rng& init_rng) : config_(std::move(config)) {
  config_.validate();
  spec_ = d::MlpSpec{config_.state_dim + config_.action_dim, config_.hidden, 1};
  for (int k = 0; k < config_.ensemble; ++k) {
    d::mlp_init(spec_, online_, member_prefix(kOnlinePrefix, k), init_rng);
  }
  delayed_ = renamed_copy(online_, kOnlinePrefix, kDelayedPrefix);
}

SoftQEnsemble::SoftQEnsemble(SoftQConfig config, ParamStore online, ParamStore delayed)
    : config_(std::move(config)), online_(std::move(online)), delayed_(std::move(delayed)) {
  config_.validate();
  spec_ = d::MlpSpec{config_.state_dim + config_.action_dim, config_.hidden, 1};
  for (int k = 0; k < config_.ensemble; ++k) {
    for (int l = 0; l < spec_.layer_count(); ++l) {
      const auto on = d::weight_name(member_prefix(kOnlinePrefix, k), l);
      const auto off = d::weight_name(member_prefix(kDelayedPrefix, k), l);
      if (!online_.contains(on) || !delayed_.contains(off)) {
        throw ContractError("SoftQEnsemble: stores are missing member " + std::to_string(k));
      }
      if (online_.value(on).rows() != delayed_.value(off).rows() ||
          online_.value(on).cols() != delayed_.value(off).cols()) {
        throw ContractError("SoftQEnsemble: online and delayed shapes differ");
      }
    }
  }
}

Var SoftQEnsemble::members(Tape& tape, const Var& states, const Var& actions, Binding binding,
                           bool use_delayed) const {
  Var s = states;
  if (states.rows() != actions.rows()) {
    if (states.rows() != 1) throw DimensionError("q_eval: state rows do not match action rows");
    s = tape.constant(states.value().replicate(actions.rows(), 1));
  }
  const Var x = d::hconcat({s, actions});
  const ParamStore& store = use_delayed ? delayed_ : online_;
  const char* root = use_delayed ? kDelayedPrefix : kOnlinePrefix;
  std::vector<Var> cols;
  cols.reserve(config_.ensemble);
  for (int k = 0; k < config_.ensemble; ++k) {
    cols.push_back(d::mlp_forward(tape, spec_, store, member_prefix(root, k), x, binding));
  }
  return config_.ensemble == 1 ? cols.front() : d::hconcat(cols);
}

Var SoftQEnsemble::aggregate(Tape& tape, const Var& states, const Var& actions, Binding binding,
                             bool use_delayed) const {
  const Var q = members(tape, states, actions, binding, use_delayed);
  if (config_.ensemble == 1) return q;
  const Var mu = d::row_mean(q);
  if (config_.penalty == 0.0) return mu;
  // Population standard deviation across members.
  const Var sd = d::sqrt(d::row_mean(d::square(d::sub(q, mu))));
  return d::sub(mu, d::scale(sd, config_.penalty));
}

QValues SoftQEnsemble::q_eval(const Matrix& states, const Matrix& actions, bool use_delayed) const {
  Tape tape;
  const Var s = tape.constant(states), a = tape.constant(actions);
  QValues out;
  out.members = members(tape, s, a, Binding::frozen, use_delayed).value();
  out.aggregate = aggregate(tape, s, a, Binding::frozen, use_delayed).value();
  return out;
}

Matrix SoftQEnsemble::bellman_target(const Matrix& rewards, const Matrix& done, double gamma,
                                     const Matrix& next_states, const Matrix& next_actions,
                                     const Matrix& next_log_pi_ss, double alpha) const {
  const Eigen::Index b = rewards.rows();
  if (done.rows() != b || next_log_pi_ss.rows() != b || next_actions.rows() != b) {
    throw DimensionError("bellman_target: batch columns disagree in length");
  }
  Matrix target = rewards;
  if (gamma == 0.0 || (done.array() != 0.0).all()) return target;
  const Matrix q = q_eval(next_states, next_actions, /*use_delayed=*/true).aggregate;
  for (Eigen::Index i = 0; i < b; ++i) {
    if (done(i, 0) != 0.0) continue;
    target(i, 0) += gamma * (q(i, 0) - alpha * next_log_pi_ss(i, 0));
  }
  return target;
}

Var SoftQEnsemble::bellman_loss(Tape& tape, const Matrix& states, const Matrix& actions,
                                const Matrix& targets) const {
  if (targets.rows() != actions.rows() || targets.cols() != 1) {
    throw DimensionError("bellman_loss: targets must be a B x 1 column");
  }
  const Var q = members(tape, tape.constant(states), tape.constant(actions), Binding::trainable, false);
  // Targets are plain constants, so nothing flows into whatever produced them.
  const Var err = d::sub(q, tape.constant(targets));
  // Sum over members of each member's batch-mean squared error.
  return d::scale(d::sum(d::square(err)), 1.0 / static_cast<double>(actions.rows()));
}

BellmanStats SoftQEnsemble::bellman_update(const Matrix& states, const Matrix& actions, const Matrix& targets) {
  Tape tape;
  const Var loss = bellman_loss(tape, states, actions, targets);
  const double value = loss.scalar();
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "loss=" << value << " batch=" << actions.rows();
    throw NumericError("bellman_update: non-finite critic loss", os.str());
  }
  const d::Gradients grads = tape.backward(loss);
  d::adam_step(online_, grads, config_.adam);
  return BellmanStats{value / static_cast<double>(config_.ensemble)};
}

void SoftQEnsemble::polyak_update() {
  const double tau = config_.polyak;
  const std::string on(kOnlinePrefix), off(kDelayedPrefix);
  for (const auto& [name, p] : online_.entries()) {
    Matrix& target = delayed_.mutable_value(off + name.substr(on.size()));
    target = tau * target + (1.0 - tau) * p.value;
  }
}

}  // namespace sspg::critic
