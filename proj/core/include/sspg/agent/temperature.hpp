#pragma once

namespace sspg::agent {

enum class TemperatureMode { fixed, automatic };

/// Entropy temperature alpha, stored as log(alpha) so it stays positive.
struct Temperature {
  double log_alpha = 0.0;
  TemperatureMode mode = TemperatureMode::fixed;
  double target_entropy = 0.0;
  double learning_rate = 1e-4;

  double alpha() const;
  static Temperature fixed(double alpha);
  static Temperature automatic(double initial_alpha, double target_entropy, double learning_rate);
};

/// Dual step on log(alpha) toward the target entropy, given the batch mean of
/// the steady-state log density. Entropy above target lowers alpha; fixed mode
/// is returned unchanged.
Temperature temperature_update(Temperature temp, double mean_log_pi_ss);

}  // namespace sspg::agent
