#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sspg/agent/agent.hpp"
#include "sspg/envs/bandit.hpp"

namespace sspg::cli {

/// Invalid run configuration. `line` is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

/// `[section]` headers and `key = value` lines; `#` and `;` start comments.
std::vector<IniEntry> parse_ini(std::string_view text, const std::string& source);

struct EnvironmentSpec {
  std::string type;            ///< "line" or "circle"
  int goals = 0;               ///< circle only
  double radius = 0.6;         ///< circle only
  double reward_scale = 1.0;
  double visit_radius = 0.3;   ///< goal neighbourhood used by evaluation and analysis

  envs::PositionalBandit make() const;
};

struct RunConfig {
  EnvironmentSpec environment;
  agent::AgentConfig agent;
  std::uint64_t seed = 1;
  std::int64_t total_steps = 1000;
  std::size_t replay_capacity = 1'000'000;
  std::int64_t checkpoint_every = 0;  ///< 0: final checkpoint only
  std::int64_t eval_every = 0;        ///< 0: no evaluation during training
  int eval_episodes = 100;
};

/// Parses a run configuration. Every key is optional except environment.type
/// (and environment.goals for circles); unknown keys are errors.
RunConfig parse_run_config(std::string_view text, const std::string& source);
RunConfig load_run_config(const std::string& path);

/// Every field written out explicitly, parseable by parse_run_config.
std::string resolved_text(const RunConfig& config);

}  // namespace sspg::cli
