#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "sspg/error.hpp"
#include "sspg_cli/commands.hpp"

namespace sspg::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

// Writes to <out>/<name> when an output directory was given, else to `fallback`.
template <class F>
void emit(const std::string& out_dir, const std::string& name, std::ostream& fallback, F&& write) {
  if (out_dir.empty()) {
    write(fallback);
    return;
  }
  fs::create_directories(out_dir);
  std::ofstream file(fs::path(out_dir) / name);
  if (!file) throw Error("cannot write " + (fs::path(out_dir) / name).string());
  write(file);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady-state policy gradient agents on positional bandits"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path;
  std::optional<std::uint64_t> seed;
  int episodes = 100, bins = 40, samples = 10000;

  auto* train = app.add_subcommand("train", "Train an agent and write run artifacts");
  train->add_option("--config", config_path, "Run configuration file")->required();
  train->add_option("--seed", seed, "Override run.seed");
  train->add_option("--out", out_dir, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and print a JSON report");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint JSON")->required();
  eval->add_option("--episodes", episodes, "Number of episodes")->check(CLI::NonNegativeNumber);
  eval->add_option("--seed", seed, "Evaluation seed (default: run seed)");
  eval->add_option("--out", out_dir, "Write eval.json into this directory");

  auto* analyze = app.add_subcommand("analyze", "Analyses of a trained checkpoint");
  analyze->require_subcommand(1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", checkpoint_path, "Checkpoint JSON")->required();
    sub->add_option("--seed", seed, "Analysis seed (default: run seed)");
    sub->add_option("--out", out_dir, "Write the CSV into this directory");
  };
  auto* psrf_trace = analyze->add_subcommand("psrf-trace", "PSRF at every evaluated reasoning length");
  add_common(psrf_trace);
  psrf_trace->add_option("--episodes", episodes, "Number of episodes")->check(CLI::NonNegativeNumber);
  auto* transition = analyze->add_subcommand("transition-matrix", "Quantized belief transition matrix");
  add_common(transition);
  transition->add_option("--samples", samples, "Beliefs per goal")->check(CLI::PositiveNumber);
  auto* ss_hist = analyze->add_subcommand("ss-hist", "Steady-state histogram against the canonical oracle");
  add_common(ss_hist);
  ss_hist->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  ss_hist->add_option("--samples", samples, "Steady-state samples")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      RunConfig config = load_run_config(config_path);
      if (seed) config.seed = *seed;
      const TrainSummary s = cmd_train(config, out_dir);
      out << "trained " << s.steps << " steps, mean reward " << s.mean_reward << ", checkpoint " << s.checkpoint.string()
          << '\n';
      return kExitOk;
    }
    RunCheckpoint cp = read_checkpoint(checkpoint_path);
    const std::uint64_t run_seed = seed.value_or(cp.config.seed);
    if (*eval) {
      const nlohmann::json report = cmd_eval(std::move(cp), episodes, run_seed);
      emit(out_dir, "eval.json", out, [&](std::ostream& o) { o << report.dump(1) << '\n'; });
    } else if (*psrf_trace) {
      emit(out_dir, "psrf_trace.csv", out,
           [&](std::ostream& o) { cmd_analyze_psrf_trace(std::move(cp), episodes, run_seed, o); });
    } else if (*transition) {
      emit(out_dir, "transition_matrix.csv", out,
           [&](std::ostream& o) { cmd_analyze_transition_matrix(cp, samples, run_seed, o); });
    } else if (*ss_hist) {
      double tv = 0.0;
      emit(out_dir, "ss_hist.csv", out, [&](std::ostream& o) { tv = cmd_analyze_ss_hist(cp, bins, samples, run_seed, o); });
      (out_dir.empty() ? err : out) << "tv " << tv << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace sspg::cli
