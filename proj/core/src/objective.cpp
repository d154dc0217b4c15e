#include "sspg/agent/objective.hpp"

#include "sspg/diff/ops.hpp"
#include "sspg/error.hpp"

namespace sspg::agent {

namespace d = sspg::diff;
using diff::Binding;
using policy::Heads;

PolicyLoss policy_gradient_loss(Tape& tape, const TransitionKernel& live, const TransitionKernel& frozen,
                                const ValueFn& value, const Matrix& states, const Matrix& seeds,
                                const std::vector<Matrix>& noise, const PolicyLossOptions& options) {
  if (options.horizon < 0) throw ContractError("policy_gradient_loss: horizon must be >= 0");
  if (noise.size() != static_cast<std::size_t>(options.horizon) + 1) {
    throw ContractError("policy_gradient_loss: need horizon + 1 noise batches, got " + std::to_string(noise.size()));
  }
  if (options.alpha < 0.0) throw ContractError("policy_gradient_loss: alpha must be >= 0");
  if (live.action_dim() != frozen.action_dim() || seeds.cols() != live.action_dim()) {
    throw DimensionError("policy_gradient_loss: action widths disagree");
  }
  const bool truncated = options.flow == GradientFlow::truncated_full;

  PolicyLoss out;
  const Var s = tape.constant(states);
  out.beliefs.push_back(
      policy::transition_sample(tape, live, s, tape.constant(seeds), tape.constant(noise[0]), Binding::trainable));
  for (int i = 1; i <= options.horizon; ++i) {
    const Var eps = tape.constant(noise[static_cast<std::size_t>(i)]);
    const Var prev = out.beliefs.back();
    out.beliefs.push_back(truncated
                              ? policy::transition_sample(tape, live, s, d::stop_gradient(prev), eps, Binding::trainable)
                              : policy::transition_sample(tape, frozen, s, prev, eps, Binding::frozen));
  }

  const bool entropy = options.alpha > 0.0;
  std::vector<Heads> frozen_components, live_components;
  if (entropy || options.want_final_log_density) {
    std::vector<Var> sources;
    if (options.component_sources.empty()) {
      sources.push_back(tape.constant(seeds));
      for (const Var& b : out.beliefs) sources.push_back(d::stop_gradient(b));
    } else {
      for (const Matrix& c : options.component_sources) {
        if (c.rows() != seeds.rows() || c.cols() != seeds.cols()) {
          throw DimensionError("policy_gradient_loss: component sources must be shaped like the seeds");
        }
        sources.push_back(tape.constant(c));
      }
    }
    for (const Var& src : sources) {
      frozen_components.push_back(frozen.heads(tape, s, src, Binding::frozen));
      if (entropy) live_components.push_back(live.heads(tape, s, src, Binding::trainable));
    }
  }

  Var total;
  for (int n = 0; n <= options.horizon; ++n) {
    const Var& a = out.beliefs[static_cast<std::size_t>(n)];
    Var term = value(tape, s, a);
    if (entropy) {
      const auto& comps = (n == 0 || truncated) ? live_components : frozen_components;
      const Var log_pi =
          policy::mixture_log_density(policy::prepare_point(a, live.squashed()), comps, options.log_density_floor);
      if (n == options.horizon) out.final_log_density = log_pi.value();
      term = d::sub(term, d::scale(log_pi, options.alpha));
    }
    term = d::mean(term);
    out.terms.push_back(term);
    total = n == 0 ? term : d::add(total, term);
  }
  out.loss = d::neg(total);

  if (!entropy && options.want_final_log_density) {
    const Var x = d::stop_gradient(out.beliefs.back());
    out.final_log_density =
        policy::mixture_log_density(policy::prepare_point(x, live.squashed()), frozen_components,
                                    options.log_density_floor)
            .value();
  }
  return out;
}

}  // namespace sspg::agent
