#include "sspg/agent/temperature.hpp"

#include <cmath>

#include "sspg/error.hpp"

namespace sspg::agent {

double Temperature::alpha() const { return std::exp(log_alpha); }

Temperature Temperature::fixed(double alpha) {
  if (!(alpha > 0.0)) throw ContractError("Temperature: alpha must be positive");
  return Temperature{std::log(alpha), TemperatureMode::fixed, 0.0, 0.0};
}

Temperature Temperature::automatic(double initial_alpha, double target_entropy, double learning_rate) {
  if (!(initial_alpha > 0.0)) throw ContractError("Temperature: alpha must be positive");
  return Temperature{std::log(initial_alpha), TemperatureMode::automatic, target_entropy, learning_rate};
}

Temperature temperature_update(Temperature temp, double mean_log_pi_ss) {
  if (temp.mode == TemperatureMode::fixed) return temp;
  // Loss L(log_alpha) = -log_alpha * (mean_log_pi + H*); dL/dlog_alpha = entropy - H*.
  const double entropy = -mean_log_pi_ss;
  temp.log_alpha -= temp.learning_rate * (entropy - temp.target_entropy);
  return temp;
}

}  // namespace sspg::agent
