#include "sspg_cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "sspg/agent/training.hpp"
#include "sspg/envs/canonical.hpp"
#include "sspg/error.hpp"

namespace sspg::cli {

namespace fs = std::filesystem;
using diff::Matrix;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out = open_output(path);
  out << doc.dump(1) << '\n';
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

struct EvalOutcome {
  std::vector<double> returns;
  Matrix actions;
  std::vector<agent::ActStats> stats;
};

EvalOutcome run_episodes(agent::Agent& agent, envs::Environment& env, int episodes, std::uint64_t seed) {
  Rng env_rng = substream(seed, "eval-env");
  Rng policy_rng = substream(seed, "eval-policy");
  EvalOutcome out;
  out.actions.resize(episodes, env.action_dim());
  for (int ep = 0; ep < episodes; ++ep) {
    Matrix state = env.reset(env_rng);
    double ret = 0.0;
    bool first = true;
    for (;;) {
      const agent::ActResult r = agent.act(state, policy_rng);
      if (first) out.actions.row(ep) = r.action.row(0);
      first = false;
      out.stats.push_back(r.stats);
      const envs::StepResult step = env.step(r.action, env_rng);
      ret += step.reward;
      if (step.done) break;
      state = step.next_state;
    }
    out.returns.push_back(ret);
  }
  return out;
}

nlohmann::json summarize(const EvalOutcome& e, const envs::PositionalBandit& env, double radius) {
  nlohmann::json report;
  const auto n = static_cast<double>(e.returns.size());
  report["episodes"] = e.returns.size();
  nlohmann::json ret = {{"mean", nullptr}, {"std", nullptr}, {"min", nullptr}, {"max", nullptr}};
  if (!e.returns.empty()) {
    double sum = 0.0, sq = 0.0, lo = e.returns.front(), hi = e.returns.front();
    for (double r : e.returns) {
      sum += r;
      sq += r * r;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double mean = sum / n;
    ret = {{"mean", mean}, {"std", std::sqrt(std::max(0.0, sq / n - mean * mean))}, {"min", lo}, {"max", hi}};
  }
  report["returns"] = ret;

  nlohmann::json goals = {{"radius", radius}, {"per_goal", std::vector<double>(env.goal_count(), 0.0)},
                          {"outside", 0.0}, {"nearest", std::vector<double>(env.goal_count(), 0.0)}};
  if (!e.returns.empty()) {
    const envs::GoalFrequencies f = envs::goal_visit_frequencies(e.actions, env, radius);
    std::vector<double> nearest(env.goal_count(), 0.0);
    for (Eigen::Index i = 0; i < e.actions.rows(); ++i) nearest[env.nearest_goal(e.actions.row(i))] += 1.0 / n;
    goals = {{"radius", radius}, {"per_goal", f.per_goal}, {"outside", f.outside}, {"nearest", nearest}};
  }
  report["goal_frequencies"] = goals;

  double steps = 0.0, conv_len = 0.0, converged = 0.0;
  int reasoning = 0;
  nlohmann::json traces = nlohmann::json::array();
  for (const agent::ActStats& s : e.stats) {
    if (s.random) continue;
    ++reasoning;
    steps += s.steps;
    conv_len += s.converged_length;
    converged += s.converged ? 1.0 : 0.0;
    nlohmann::json t = nlohmann::json::array();
    for (const auto& [len, r] : s.trace) t.push_back({len, std::isfinite(r) ? nlohmann::json(r) : nlohmann::json(nullptr)});
    traces.push_back(std::move(t));
  }
  nlohmann::json reason = {{"acts", reasoning}, {"mean_steps", nullptr}, {"mean_converged_length", nullptr},
                           {"converged_fraction", nullptr}};
  if (reasoning > 0) {
    reason["mean_steps"] = steps / reasoning;
    reason["mean_converged_length"] = conv_len / reasoning;
    reason["converged_fraction"] = converged / reasoning;
  }
  report["reasoning"] = reason;
  report["psrf_traces"] = traces;
  return report;
}

}  // namespace

nlohmann::json checkpoint_document(const std::string& config_text, const agent::Agent& agent) {
  return {{"format", "sspg-run"}, {"version", kCheckpointFormatVersion}, {"config", config_text},
          {"agent", agent.to_json()}};
}

RunCheckpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": not valid JSON (" + e.what() + ")");
  }
  if (!doc.is_object() || doc.value("format", "") != "sspg-run") {
    throw CheckpointError(path.string() + ": not a run checkpoint");
  }
  if (!doc.contains("version") || doc["version"] != kCheckpointFormatVersion) {
    throw CheckpointError(path.string() + ": checkpoint version " + doc.value("version", nlohmann::json()).dump() +
                          " does not match supported version " + std::to_string(kCheckpointFormatVersion));
  }
  const std::string text = doc.at("config").get<std::string>();
  RunConfig config = parse_run_config(text, path.string() + " (embedded config)");
  agent::Agent agent = agent::Agent::from_json(config.agent, doc.at("agent"));
  return RunCheckpoint{std::move(config), text, std::move(agent)};
}

TrainSummary cmd_train(const RunConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::string text = resolved_text(config);
  {
    std::ofstream c = open_output(out_dir / "config.ini");
    c << text;
  }
  envs::PositionalBandit env = config.environment.make();
  agent::Agent agent(config.agent, config.seed);
  agent::RunStreams streams(config.seed);

  std::ofstream metrics = open_output(out_dir / "metrics.csv");
  metrics << "step,reward,random,act_steps,converged_length,converged,final_r_p,learn_steps,policy_loss,"
             "critic_loss,alpha,n_hat,mean_r_p\n";
  std::ofstream evals;
  if (config.eval_every > 0) {
    evals = open_output(out_dir / "eval.csv");
    evals << "step,episodes,mean_return,mean_steps,converged_fraction\n";
  }

  TrainSummary summary;
  double reward_sum = 0.0;
  agent::train(agent, env, agent::TrainingConfig{config.total_steps, config.replay_capacity}, streams,
               [&](const agent::StepRecord& r) {
                 reward_sum += r.reward;
                 const agent::ActStats& a = r.act;
                 metrics << r.step << ',' << csv_number(r.reward) << ',' << (a.random ? 1 : 0) << ',' << a.steps
                         << ',' << a.converged_length << ',' << (a.converged ? 1 : 0) << ','
                         << (a.random ? "" : csv_number(a.final_r_p)) << ',' << r.losses.size();
                 if (r.losses.empty()) {
                   metrics << ",,,,," << '\n';
                 } else {
                   const agent::LossReport& l = r.losses.back();
                   metrics << ',' << csv_number(l.policy_loss) << ',' << csv_number(l.critic_loss) << ','
                           << csv_number(l.alpha) << ',' << csv_number(l.n_hat) << ',' << csv_number(l.mean_r_p)
                           << '\n';
                 }
                 metrics.flush();
                 if (config.checkpoint_every > 0 && r.step % config.checkpoint_every == 0) {
                   write_json(out_dir / ("checkpoint_" + std::to_string(r.step) + ".json"),
                              checkpoint_document(text, agent));
                 }
                 if (config.eval_every > 0 && r.step % config.eval_every == 0) {
                   agent::Agent copy = agent;
                   envs::PositionalBandit eval_env = config.environment.make();
                   const nlohmann::json rep =
                       summarize(run_episodes(copy, eval_env, config.eval_episodes, config.seed),
                                 eval_env, config.environment.visit_radius);
                   auto field = [](const nlohmann::json& v) {
                     return v.is_null() ? std::string() : csv_number(v.get<double>());
                   };
                   evals << r.step << ',' << config.eval_episodes << ',' << field(rep["returns"]["mean"]) << ','
                         << field(rep["reasoning"]["mean_steps"]) << ','
                         << field(rep["reasoning"]["converged_fraction"]) << '\n';
                   evals.flush();
                 }
                 summary.steps = r.step;
               });
  summary.mean_reward = summary.steps > 0 ? reward_sum / static_cast<double>(summary.steps) : 0.0;
  summary.checkpoint = out_dir / "checkpoint.json";
  write_json(summary.checkpoint, checkpoint_document(text, agent));
  return summary;
}

nlohmann::json cmd_eval(RunCheckpoint checkpoint, int episodes, std::uint64_t seed) {
  if (episodes < 0) throw ContractError("episodes must be >= 0");
  envs::PositionalBandit env = checkpoint.config.environment.make();
  return summarize(run_episodes(checkpoint.agent, env, episodes, seed), env,
                   checkpoint.config.environment.visit_radius);
}

void cmd_analyze_psrf_trace(RunCheckpoint checkpoint, int episodes, std::uint64_t seed, std::ostream& csv) {
  if (episodes < 0) throw ContractError("episodes must be >= 0");
  envs::PositionalBandit env = checkpoint.config.environment.make();
  const EvalOutcome e = run_episodes(checkpoint.agent, env, episodes, seed);
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  csv << "act,n,r_p\n";
  for (std::size_t i = 0; i < e.stats.size(); ++i) {
    for (const auto& [n, r] : e.stats[i].trace) csv << i << ',' << n << ',' << (std::isfinite(r) ? csv_number(r) : "inf") << '\n';
  }
}

void cmd_analyze_transition_matrix(const RunCheckpoint& checkpoint, int samples, std::uint64_t seed,
                                   std::ostream& csv) {
  const envs::PositionalBandit env = checkpoint.config.environment.make();
  Rng rng = substream(seed, "analysis");
  const Matrix state = Matrix::Zero(1, env.state_dim());
  const envs::QuantizedTransitions t = envs::quantized_transition_matrix(
      checkpoint.agent.policy(), state, env, checkpoint.config.environment.visit_radius, samples, rng);
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  csv << "from";
  for (int g = 0; g < env.goal_count(); ++g) csv << ",to_" << g;
  csv << ",defined\n";
  for (int g = 0; g < env.goal_count(); ++g) {
    csv << g;
    for (int h = 0; h < env.goal_count(); ++h) csv << ',' << (t.defined[g] ? csv_number(t.probabilities(g, h)) : "nan");
    csv << ',' << (t.defined[g] ? 1 : 0) << '\n';
  }
}

double cmd_analyze_ss_hist(const RunCheckpoint& checkpoint, int bins, int samples, std::uint64_t seed,
                           std::ostream& csv) {
  const envs::PositionalBandit env = checkpoint.config.environment.make();
  if (env.action_dim() != 1) throw ContractError("ss-hist needs a 1-D environment");
  if (bins < 1 || samples < 1) throw ContractError("bins and samples must be >= 1");
  Rng rng = substream(seed, "analysis");
  const Matrix state = Matrix::Zero(1, env.state_dim());
  const Matrix draws =
      policy::sample_steady_state(checkpoint.agent.policy(), state, samples, checkpoint.config.agent.n_max, rng);
  const std::vector<double> xs(draws.data(), draws.data() + draws.size());
  const std::vector<double> hist = envs::histogram(xs, -1.0, 1.0, bins);

  const envs::Grid grid{-1.0, 1.0, 200 * bins + 1};
  const envs::GridDensity oracle = envs::canonical_density(
      grid, [&](double x) { return env.reward(Matrix::Constant(1, 1, x)); }, checkpoint.agent.temperature().alpha());
  const std::vector<double> mass = oracle.bin_masses(bins);
  const double tv = envs::total_variation(hist, mass);

  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  csv << "bin_lo,bin_hi,empirical,canonical\n";
  const double width = 2.0 / bins;
  for (int b = 0; b < bins; ++b) {
    csv << -1.0 + width * b << ',' << -1.0 + width * (b + 1) << ',' << hist[b] << ',' << mass[b] << '\n';
  }
  return tv;
}

}  // namespace sspg::cli
