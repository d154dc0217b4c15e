#include "sspg_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "sspg/error.hpp"

namespace sspg::cli {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const IniEntry& e, const std::string& source) {
  T v{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(source, e.line, "invalid value '" + e.value + "' for " + e.section + "." + e.key);
  }
  return v;
}

bool parse_bool(const IniEntry& e, const std::string& source) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError(source, e.line, "expected true/false for " + e.section + "." + e.key + ", got '" + e.value + "'");
}

std::vector<int> parse_int_list(const IniEntry& e, const std::string& source) {
  std::vector<int> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    IniEntry part = e;
    part.value = trim(item);
    out.push_back(parse_number<int>(part, source));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

using Setter = std::function<void(RunConfig&, const IniEntry&, const std::string&)>;

template <class T, class M>
Setter number(M member) {
  return [member](RunConfig& c, const IniEntry& e, const std::string& src) { member(c) = parse_number<T>(e, src); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto& a = t;
    a["run.seed"] = number<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.seed; });
    a["run.total_steps"] = number<std::int64_t>([](RunConfig& c) -> std::int64_t& { return c.total_steps; });
    a["run.replay_capacity"] = number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.replay_capacity; });
    a["run.checkpoint_every"] = number<std::int64_t>([](RunConfig& c) -> std::int64_t& { return c.checkpoint_every; });
    a["run.eval_every"] = number<std::int64_t>([](RunConfig& c) -> std::int64_t& { return c.eval_every; });
    a["run.eval_episodes"] = number<int>([](RunConfig& c) -> int& { return c.eval_episodes; });

    a["environment.type"] = [](RunConfig& c, const IniEntry& e, const std::string& src) {
      if (e.value != "line" && e.value != "circle") {
        throw ConfigError(src, e.line, "environment.type must be 'line' or 'circle', got '" + e.value + "'");
      }
      c.environment.type = e.value;
    };
    a["environment.goals"] = number<int>([](RunConfig& c) -> int& { return c.environment.goals; });
    a["environment.radius"] = number<double>([](RunConfig& c) -> double& { return c.environment.radius; });
    a["environment.reward_scale"] = number<double>([](RunConfig& c) -> double& { return c.environment.reward_scale; });
    a["environment.visit_radius"] = number<double>([](RunConfig& c) -> double& { return c.environment.visit_radius; });

#define SSPG_AGENT_NUMBER(T, field) \
  a["agent." #field] = number<T>([](RunConfig& c) -> T& { return c.agent.field; })
#define SSPG_AGENT_BOOL(field)                                                   \
  a["agent." #field] = [](RunConfig& c, const IniEntry& e, const std::string& s) { \
    c.agent.field = parse_bool(e, s);                                            \
  }
#define SSPG_AGENT_LIST(field)                                                   \
  a["agent." #field] = [](RunConfig& c, const IniEntry& e, const std::string& s) { \
    c.agent.field = parse_int_list(e, s);                                        \
  }
    SSPG_AGENT_LIST(policy_hidden);
    SSPG_AGENT_LIST(critic_hidden);
    SSPG_AGENT_NUMBER(int, initial_beliefs);
    SSPG_AGENT_NUMBER(int, memory_capacity);
    SSPG_AGENT_NUMBER(double, rho);
    SSPG_AGENT_NUMBER(double, psrf_threshold);
    SSPG_AGENT_NUMBER(int, n_max);
    SSPG_AGENT_NUMBER(double, initial_n_hat);
    SSPG_AGENT_BOOL(sample_full_history);
    SSPG_AGENT_NUMBER(double, gamma);
    SSPG_AGENT_NUMBER(double, polyak);
    SSPG_AGENT_NUMBER(double, penalty);
    SSPG_AGENT_NUMBER(int, ensemble);
    SSPG_AGENT_NUMBER(int, batch_size);
    SSPG_AGENT_NUMBER(double, policy_lr);
    SSPG_AGENT_NUMBER(double, critic_lr);
    SSPG_AGENT_NUMBER(int, random_steps);
    SSPG_AGENT_NUMBER(int, learning_starts);
    SSPG_AGENT_NUMBER(int, utd);
    SSPG_AGENT_NUMBER(double, alpha);
    SSPG_AGENT_BOOL(auto_alpha);
    SSPG_AGENT_NUMBER(double, target_entropy);
    SSPG_AGENT_NUMBER(double, alpha_lr);
    SSPG_AGENT_NUMBER(double, log_std_min);
    SSPG_AGENT_NUMBER(double, log_std_max);
    SSPG_AGENT_NUMBER(double, log_density_floor);
    SSPG_AGENT_BOOL(policy_at_next_state);
#undef SSPG_AGENT_NUMBER
#undef SSPG_AGENT_BOOL
#undef SSPG_AGENT_LIST
    a["agent.psrf_variant"] = [](RunConfig& c, const IniEntry& e, const std::string& s) {
      if (e.value == "literal") c.agent.psrf_variant = diag::PsrfVariant::literal;
      else if (e.value == "brooks_gelman") c.agent.psrf_variant = diag::PsrfVariant::brooks_gelman;
      else throw ConfigError(s, e.line, "agent.psrf_variant must be 'literal' or 'brooks_gelman'");
    };
    a["agent.flow"] = [](RunConfig& c, const IniEntry& e, const std::string& s) {
      if (e.value == "steady_state") c.agent.flow = agent::GradientFlow::steady_state;
      else if (e.value == "truncated_full") c.agent.flow = agent::GradientFlow::truncated_full;
      else throw ConfigError(s, e.line, "agent.flow must be 'steady_state' or 'truncated_full'");
    };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<IniEntry> parse_ini(std::string_view text, const std::string& source) {
  std::vector<IniEntry> out;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(source, line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    IniEntry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
               line_no};
    if (e.key.empty()) throw ConfigError(source, line_no, "missing key before '='");
    if (e.section.empty()) throw ConfigError(source, line_no, "key '" + e.key + "' outside any section");
    out.push_back(std::move(e));
  }
  return out;
}

RunConfig parse_run_config(std::string_view text, const std::string& source) {
  RunConfig config;
  std::map<std::string, int> seen;
  for (const IniEntry& e : parse_ini(text, source)) {
    const std::string full = e.section + "." + e.key;
    const auto it = setters().find(full);
    if (it == setters().end()) throw ConfigError(source, e.line, "unknown key '" + full + "'");
    if (auto [prev, fresh] = seen.emplace(full, e.line); !fresh) {
      throw ConfigError(source, e.line, "duplicate key '" + full + "' (first set on line " +
                                            std::to_string(prev->second) + ")");
    }
    it->second(config, e, source);
  }
  if (config.environment.type.empty()) throw ConfigError(source, 0, "missing required key 'environment.type'");
  if (config.environment.type == "circle" && !seen.count("environment.goals")) {
    throw ConfigError(source, 0, "missing required key 'environment.goals'");
  }
  auto at = [&](const std::string& key) { return seen.count(key) ? seen.at(key) : 0; };
  if (config.total_steps < 0) throw ConfigError(source, at("run.total_steps"), "run.total_steps must be >= 0");
  if (config.checkpoint_every < 0) throw ConfigError(source, at("run.checkpoint_every"), "run.checkpoint_every must be >= 0");
  if (config.eval_every < 0) throw ConfigError(source, at("run.eval_every"), "run.eval_every must be >= 0");
  if (config.eval_episodes < 0) throw ConfigError(source, at("run.eval_episodes"), "run.eval_episodes must be >= 0");
  if (config.replay_capacity == 0) throw ConfigError(source, at("run.replay_capacity"), "run.replay_capacity must be > 0");
  if (!(config.environment.visit_radius > 0.0)) {
    throw ConfigError(source, at("environment.visit_radius"), "environment.visit_radius must be > 0");
  }

  // Dimensions follow from the environment.
  try {
    const envs::PositionalBandit env = config.environment.make();
    config.agent.state_dim = env.state_dim();
    config.agent.action_dim = env.action_dim();
  } catch (const sspg::Error& e) {
    throw ConfigError(source, at("environment.goals"), e.what());
  }
  try {
    config.agent.validate();
  } catch (const sspg::Error& e) {
    throw ConfigError(source, 0, e.what());
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

envs::PositionalBandit EnvironmentSpec::make() const {
  if (type == "line") {
    const envs::PositionalBandit base = envs::PositionalBandit::line();
    return envs::PositionalBandit(base.goals(), reward_scale);
  }
  if (type == "circle") {
    if (goals < 1) throw ContractError("environment.goals must be >= 1");
    const envs::PositionalBandit base = envs::PositionalBandit::circle(goals, radius);
    return envs::PositionalBandit(base.goals(), reward_scale);
  }
  throw ContractError("unknown environment type '" + type + "'");
}

std::string resolved_text(const RunConfig& c) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto& a = c.agent;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "[run]\n"
     << "seed = " << c.seed << "\n"
     << "total_steps = " << c.total_steps << "\n"
     << "replay_capacity = " << c.replay_capacity << "\n"
     << "checkpoint_every = " << c.checkpoint_every << "\n"
     << "eval_every = " << c.eval_every << "\n"
     << "eval_episodes = " << c.eval_episodes << "\n\n"
     << "[environment]\n"
     << "type = " << c.environment.type << "\n";
  if (c.environment.type == "circle") {
    os << "goals = " << c.environment.goals << "\n"
       << "radius = " << c.environment.radius << "\n";
  }
  os << "reward_scale = " << c.environment.reward_scale << "\n"
     << "visit_radius = " << c.environment.visit_radius << "\n\n"
     << "[agent]\n"
     << "policy_hidden = " << join(a.policy_hidden) << "\n"
     << "critic_hidden = " << join(a.critic_hidden) << "\n"
     << "initial_beliefs = " << a.initial_beliefs << "\n"
     << "memory_capacity = " << a.memory_capacity << "\n"
     << "rho = " << a.rho << "\n"
     << "psrf_threshold = " << a.psrf_threshold << "\n"
     << "psrf_variant = " << (a.psrf_variant == diag::PsrfVariant::literal ? "literal" : "brooks_gelman") << "\n"
     << "n_max = " << a.n_max << "\n"
     << "initial_n_hat = " << a.initial_n_hat << "\n"
     << "sample_full_history = " << b(a.sample_full_history) << "\n"
     << "gamma = " << a.gamma << "\n"
     << "polyak = " << a.polyak << "\n"
     << "penalty = " << a.penalty << "\n"
     << "ensemble = " << a.ensemble << "\n"
     << "batch_size = " << a.batch_size << "\n"
     << "policy_lr = " << a.policy_lr << "\n"
     << "critic_lr = " << a.critic_lr << "\n"
     << "random_steps = " << a.random_steps << "\n"
     << "learning_starts = " << a.learning_starts << "\n"
     << "utd = " << a.utd << "\n"
     << "alpha = " << a.alpha << "\n"
     << "auto_alpha = " << b(a.auto_alpha) << "\n"
     << "target_entropy = " << a.target_entropy << "\n"
     << "alpha_lr = " << a.alpha_lr << "\n"
     << "log_std_min = " << a.log_std_min << "\n"
     << "log_std_max = " << a.log_std_max << "\n"
     << "log_density_floor = " << a.log_density_floor << "\n"
     << "flow = " << (a.flow == agent::GradientFlow::steady_state ? "steady_state" : "truncated_full") << "\n"
     << "policy_at_next_state = " << b(a.policy_at_next_state) << "\n";
  return os.str();
}

}  // namespace sspg::cli
