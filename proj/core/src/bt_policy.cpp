#include "sspg/policy/bt_policy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sspg/diff/ops.hpp"
#include "sspg/error.hpp"

namespace sspg::policy {

namespace d = sspg::diff;

void BTPolicyConfig::validate() const {
  if (state_dim <= 0 || action_dim <= 0) throw ContractError("BTPolicyConfig: dimensions must be positive");
  for (int h : hidden) {
    if (h <= 0) throw ContractError("BTPolicyConfig: hidden widths must be positive");
  }
  if (!(log_std_min < log_std_max)) throw ContractError("BTPolicyConfig: log_std_min must be < log_std_max");
}

namespace {

d::MlpSpec make_spec(const BTPolicyConfig& c) {
  return d::MlpSpec{c.state_dim + c.action_dim, c.hidden, 2 * c.action_dim};
}

Var expand_states(Tape& tape, const Var& states, Eigen::Index rows) {
  if (states.rows() == rows) return states;
  if (states.rows() != 1) {
    std::ostringstream os;
    os << "transition kernel: " << states.rows() << " state rows for " << rows << " actions";
    throw DimensionError(os.str());
  }
  if (states.requires_grad()) throw ContractError("transition kernel: broadcast states cannot require gradients");
  return tape.constant(repeat_rows(states.value(), rows));
}

void check_finite(const Matrix& m, const char* what) {
  if (m.allFinite()) return;
  std::ostringstream os;
  os << "rows with non-finite entries:";
  int shown = 0;
  for (Eigen::Index i = 0; i < m.rows() && shown < 8; ++i) {
    if (!m.row(i).allFinite()) {
      os << " [" << i << ": " << m.row(i) << "]";
      ++shown;
    }
  }
  throw NumericError(what, os.str());
}

}  // namespace

BTPolicy::BTPolicy(BTPolicyConfig config, Rng& init_rng) : config_(std::move(config)) {
  config_.validate();
  spec_ = make_spec(config_);
  d::mlp_init(spec_, params_, kPrefix, init_rng);
}

BTPolicy::BTPolicy(BTPolicyConfig config, ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  spec_ = make_spec(config_);
  for (int l = 0; l < spec_.layer_count(); ++l) {
    if (!params_.contains(d::weight_name(kPrefix, l)) || !params_.contains(d::bias_name(kPrefix, l))) {
      throw ContractError("BTPolicy: parameter store is missing layer " + std::to_string(l));
    }
  }
}

BTPolicy BTPolicy::zeros(BTPolicyConfig config) {
  config.validate();
  ParamStore store;
  d::mlp_init_zero(make_spec(config), store, kPrefix);
  return BTPolicy(std::move(config), std::move(store));
}

Heads BTPolicy::heads(Tape& tape, const Var& states, const Var& actions, Binding binding) const {
  if (actions.cols() != config_.action_dim) {
    throw DimensionError("BTPolicy: action width " + std::to_string(actions.cols()) + ", expected " +
                         std::to_string(config_.action_dim));
  }
  const Var s = expand_states(tape, states, actions.rows());
  const Var out = d::mlp_forward(tape, spec_, params_, kPrefix, d::hconcat({s, actions}), binding);
  const int k = config_.action_dim;
  const double half = 0.5 * (config_.log_std_max - config_.log_std_min);
  const Var raw = d::slice_cols(out, k, k);
  // log_std = min + half * (tanh(raw) + 1)
  const Var log_std = d::add_scalar(d::scale(d::tanh(raw), half), config_.log_std_min + half);
  return Heads{d::slice_cols(out, 0, k), log_std};
}

double BTPolicy::raw_for_log_std(double log_std) const {
  const double half = 0.5 * (config_.log_std_max - config_.log_std_min);
  const double u = (log_std - config_.log_std_min) / half - 1.0;
  if (!(u > -1.0 && u < 1.0)) throw ContractError("BTPolicy::raw_for_log_std: value outside the clamp range");
  return std::atanh(u);
}

ActionBeliefBatch::ActionBeliefBatch(Matrix beliefs) : beliefs_(std::move(beliefs)) {
  if (!beliefs_.allFinite() || (beliefs_.array().abs() >= 1.0).any()) {
    throw ContractError("ActionBeliefBatch: beliefs must lie strictly inside (-1, 1)");
  }
}

ChainHistory ChainHistory::prefix(int n) const {
  if (n < 0 || n > length()) throw ContractError("ChainHistory::prefix: length out of range");
  ChainHistory out{state, start, {}, {}};
  out.steps.assign(steps.begin(), steps.begin() + n);
  out.noise.assign(noise.begin(), noise.begin() + std::min<int>(n, static_cast<int>(noise.size())));
  return out;
}

Matrix ChainHistory::all_beliefs() const {
  const Eigen::Index m = chains();
  Matrix out(m * (steps.size() + 1), dim());
  out.topRows(m) = start;
  for (std::size_t i = 0; i < steps.size(); ++i) out.middleRows(m * (i + 1), m) = steps[i];
  return out;
}

void ChainHistory::validate() const {
  if (steps.empty()) throw ContractError("ChainHistory: chain has no steps");
  for (const Matrix& s : steps) {
    if (s.rows() != start.rows() || s.cols() != start.cols()) {
      throw ContractError("ChainHistory: step batches disagree in shape");
    }
  }
}

Matrix repeat_rows(const Matrix& row, Eigen::Index n) {
  if (row.rows() != 1) throw DimensionError("repeat_rows: expected a single row");
  return row.replicate(n, 1);
}

Var transition_sample(Tape& tape, const TransitionKernel& kernel, const Var& states, const Var& actions,
                      const Var& noise, Binding binding) {
  if (noise.rows() != actions.rows() || noise.cols() != actions.cols()) {
    throw DimensionError("transition_sample: noise shape differs from the action batch");
  }
  const Heads h = kernel.heads(tape, states, actions, binding);
  Var pre = d::add(h.mean, d::mul(d::exp(h.log_std), noise));
  if (!kernel.squashed()) return pre;
  return d::clamp(d::tanh(pre), -1.0 + kCubeMargin, 1.0 - kCubeMargin);
}

PreparedPoint prepare_point(const Var& x, bool squashed) {
  if (!squashed) {
    return PreparedPoint{x, x.tape()->constant(Matrix::Zero(x.rows(), 1))};
  }
  const Var clipped = d::clamp(x, -1.0 + kAtanhClip, 1.0 - kAtanhClip);
  const Var jac = d::row_sum(d::log(d::add_scalar(d::neg(d::square(clipped)), 1.0)));
  return PreparedPoint{d::atanh(clipped), jac};
}

Var log_density(const PreparedPoint& x, const Heads& heads) {
  static const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const Var z = d::mul(d::sub(x.pre, heads.mean), d::exp(d::neg(heads.log_std)));
  const Var per_dim = d::add(d::scale(d::square(z), -0.5), d::neg(heads.log_std));
  const double k = static_cast<double>(x.pre.cols());
  return d::sub(d::add_scalar(d::row_sum(per_dim), -k * kHalfLog2Pi), x.log_jacobian);
}

Var mixture_log_density(const PreparedPoint& x, const std::vector<Heads>& components, double floor) {
  if (components.empty()) throw ContractError("mixture_log_density: no components");
  std::vector<Var> cols;
  cols.reserve(components.size());
  for (const Heads& h : components) cols.push_back(log_density(x, h));
  const Var lse = d::logsumexp_rows(d::hconcat(cols));
  const Var avg = d::add_scalar(lse, -std::log(static_cast<double>(components.size())));
  return d::clamp(avg, floor, std::numeric_limits<double>::infinity());
}

HeadValues evaluate_heads(const TransitionKernel& kernel, const Matrix& state, const Matrix& actions) {
  Tape tape;
  const Heads h = kernel.heads(tape, tape.constant(state), tape.constant(actions), Binding::frozen);
  return HeadValues{h.mean.value(), h.log_std.value()};
}

Matrix transition_sample(const TransitionKernel& kernel, const Matrix& state, const Matrix& actions,
                         const Matrix& noise) {
  Tape tape;
  const Heads h = kernel.heads(tape, tape.constant(state), tape.constant(actions), Binding::frozen);
  check_finite(h.mean.value(), "transition_sample: non-finite mean");
  check_finite(h.log_std.value(), "transition_sample: non-finite log_std");
  if (noise.rows() != actions.rows() || noise.cols() != actions.cols()) {
    throw DimensionError("transition_sample: noise shape differs from the action batch");
  }
  if (h.mean.rows() != actions.rows() || h.mean.cols() != actions.cols() || h.log_std.rows() != actions.rows() ||
      h.log_std.cols() != actions.cols()) {
    throw DimensionError("transition_sample: kernel heads must match the action batch shape");
  }
  Matrix pre = h.mean.value().array() + h.log_std.value().array().exp() * noise.array();
  if (!kernel.squashed()) return pre;
  return pre.array().tanh().cwiseMax(-1.0 + kCubeMargin).cwiseMin(1.0 - kCubeMargin);
}

namespace {

Matrix clip_for_density(const Matrix& x, bool squashed, const char* who) {
  if (!squashed) return x;
  const double lim = 1.0 - kAtanhClip;
  if ((x.array().abs() > lim).any()) {
    std::ostringstream os;
    os << who << ": belief " << x << " within " << kAtanhClip << " of the cube boundary; clipped";
    warn(os.str());
  }
  return x.cwiseMax(-lim).cwiseMin(lim);
}

}  // namespace

double log_prob(const TransitionKernel& kernel, const Matrix& state, const Matrix& action, const Matrix& next) {
  if (action.rows() != 1 || next.rows() != 1) throw DimensionError("log_prob: expects single beliefs");
  if (next.cols() != kernel.action_dim()) throw DimensionError("log_prob: belief width mismatch");
  Tape tape;
  const Heads h = kernel.heads(tape, tape.constant(state), tape.constant(action), Binding::frozen);
  const Matrix x = clip_for_density(next, kernel.squashed(), "log_prob");
  return log_density(prepare_point(tape.constant(x), kernel.squashed()), h).scalar();
}

ChainHistory simulate_chain(const TransitionKernel& kernel, const Matrix& state, const Matrix& start, int steps,
                            Rng& rng) {
  if (steps < 1) throw ContractError("simulate_chain: need at least one step");
  ChainHistory chain{state, start, {}, {}};
  extend_chain(chain, kernel, steps, rng);
  return chain;
}

void extend_chain(ChainHistory& chain, const TransitionKernel& kernel, int steps, Rng& rng) {
  chain.steps.reserve(chain.steps.size() + steps);
  chain.noise.reserve(chain.noise.size() + steps);
  for (int i = 0; i < steps; ++i) {
    const Matrix& current = chain.steps.empty() ? chain.start : chain.steps.back();
    Matrix eps = normal_matrix(rng, current.rows(), current.cols());
    Matrix next = transition_sample(kernel, chain.state, current, eps);
    chain.noise.push_back(std::move(eps));
    chain.steps.push_back(std::move(next));
  }
}

Matrix sample_steady_state(const TransitionKernel& kernel, const Matrix& state, int samples, int burn_in, Rng& rng) {
  if (samples < 1 || burn_in < 1) throw ContractError("sample_steady_state: samples and burn_in must be >= 1");
  Matrix current = uniform_matrix(rng, samples, kernel.action_dim(), -1.0, 1.0);
  for (int i = 0; i < burn_in; ++i) {
    const Matrix eps = normal_matrix(rng, current.rows(), current.cols());
    current = transition_sample(kernel, state, current, eps);
  }
  return current;
}

double ss_log_prob_estimate(const TransitionKernel& kernel, const Matrix& state, const Matrix& action,
                            const Matrix& components, double floor) {
  if (action.rows() != 1) throw DimensionError("ss_log_prob_estimate: expects a single belief");
  if (components.rows() == 0) throw ContractError("ss_log_prob_estimate: no chain beliefs");
  Tape tape;
  const Heads h = kernel.heads(tape, tape.constant(state), tape.constant(components), Binding::frozen);
  const Matrix x = clip_for_density(action, kernel.squashed(), "ss_log_prob_estimate");
  const PreparedPoint p = prepare_point(tape.constant(repeat_rows(x, components.rows())), kernel.squashed());
  // One row per component; the mixture is over rows here.
  const Matrix lds = log_density(p, h).value();
  const double m = lds.maxCoeff();
  double value = -std::numeric_limits<double>::infinity();
  if (std::isfinite(m)) {
    value = m + std::log((lds.array() - m).exp().mean());
  }
  if (!(value >= floor)) {
    std::ostringstream os;
    os << "ss_log_prob_estimate: component densities underflow; flooring at " << floor;
    warn(os.str());
    value = floor;
  }
  return value;
}

double ss_log_prob_estimate(const TransitionKernel& kernel, const Matrix& state, const Matrix& action,
                            const ChainHistory& chain, double floor) {
  return ss_log_prob_estimate(kernel, state, action, chain.all_beliefs(), floor);
}

}  // namespace sspg::policy
