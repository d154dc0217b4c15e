#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sspg/agent/agent.hpp"
#include "sspg_cli/config.hpp"

namespace sspg::cli {

inline constexpr int kCheckpointFormatVersion = 1;

/// Everything needed to resume or evaluate a run.
struct RunCheckpoint {
  RunConfig config;
  std::string config_text;
  agent::Agent agent;
};

nlohmann::json checkpoint_document(const std::string& config_text, const agent::Agent& agent);
/// Throws CheckpointError on a version mismatch or malformed document.
RunCheckpoint read_checkpoint(const std::filesystem::path& path);

struct TrainSummary {
  std::int64_t steps = 0;
  double mean_reward = 0.0;
  std::filesystem::path checkpoint;
};

/// Trains as configured and writes config.ini, metrics.csv, eval.csv (when
/// enabled) and checkpoint JSON files into `out_dir`.
TrainSummary cmd_train(const RunConfig& config, const std::filesystem::path& out_dir);

/// Acts for `episodes` episodes with streams derived from `seed`.
nlohmann::json cmd_eval(RunCheckpoint checkpoint, int episodes, std::uint64_t seed);

/// CSV of (episode, N, R^p) for every PSRF evaluation during `episodes` act() calls.
void cmd_analyze_psrf_trace(RunCheckpoint checkpoint, int episodes, std::uint64_t seed, std::ostream& csv);

/// CSV of the quantized G x G belief transition matrix.
void cmd_analyze_transition_matrix(const RunCheckpoint& checkpoint, int samples, std::uint64_t seed,
                                   std::ostream& csv);

/// CSV histogram of steady-state samples next to the canonical oracle; returns the TV distance.
double cmd_analyze_ss_hist(const RunCheckpoint& checkpoint, int bins, int samples, std::uint64_t seed,
                           std::ostream& csv);

/// Entry point shared by the executable and the tests. Exit codes: 0 success,
/// 1 other failure, 2 configuration or checkpoint error, 3 numeric failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sspg::cli
