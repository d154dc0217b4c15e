#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sspg/error.hpp"
#include "sspg_cli/commands.hpp"
#include "sspg_cli/config.hpp"

using namespace sspg;
using namespace sspg::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmallRun = R"(# tiny two-goal run
[run]
seed = 5
total_steps = 40
checkpoint_every = 20
eval_every = 20
eval_episodes = 4

[environment]
type = circle
goals = 2

[agent]
policy_hidden = 8,8
critic_hidden = 8,8
initial_beliefs = 16
memory_capacity = 16
n_max = 8
batch_size = 16
random_steps = 10
learning_starts = 10
alpha = 0.1
)";

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sspg_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_of(const std::string& text, const char* needle) {
  try {
    parse_run_config(text, "t.ini");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
    return e.line();
  }
  FAIL("expected a ConfigError");
  return -1;
}

int call(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "sspg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST_CASE("config parsing reports the offending line") {
  CHECK(line_of("[run]\nseed = 1\n", "environment.type") == 0);
  CHECK(line_of("[environment]\ntype = circle\n", "environment.goals") == 0);
  CHECK(line_of("[environment]\ntype = line\n[agent]\nalpah = 0.1\n", "agent.alpah") == 4);
  CHECK(line_of("[environment]\ntype = line\n\n[agent]\nalpha = fast\n", "agent.alpha") == 5);
  CHECK(line_of("[environment]\ntype = line\ntype = line\n", "duplicate") == 3);
  CHECK(line_of("seed = 1\n", "outside any section") == 1);
  CHECK(line_of("[environment]\ntype = torus\n", "environment.type") == 2);
  CHECK(line_of("[environment\n", "section") == 1);
}

TEST_CASE("resolved config is explicit and parses back to itself") {
  const RunConfig c = parse_run_config(kSmallRun, "small.ini");
  CHECK(c.agent.action_dim == 2);
  CHECK(c.agent.policy_hidden == std::vector<int>{8, 8});
  const std::string text = resolved_text(c);
  CHECK(text.find("psrf_threshold = ") != std::string::npos);
  CHECK(resolved_text(parse_run_config(text, "resolved.ini")) == text);
}

TEST_CASE("bundled configs load") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(SSPG_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    const RunConfig c = load_run_config(entry.path().string());
    CHECK(c.total_steps == 1000);
    CHECK(c.agent.alpha == doctest::Approx(0.1));
    ++seen;
  }
  CHECK(seen == 5);
}

TEST_CASE("train writes artifacts and is deterministic under a seed") {
  const RunConfig c = parse_run_config(kSmallRun, "small.ini");
  const fs::path a = scratch_dir("train_a"), b = scratch_dir("train_b");
  const TrainSummary sa = cmd_train(c, a);
  cmd_train(c, b);
  CHECK(sa.steps == 40);
  for (const char* f : {"config.ini", "metrics.csv", "eval.csv", "checkpoint.json", "checkpoint_20.json"}) {
    CHECK(fs::exists(a / f));
  }
  const std::string metrics = slurp(a / "metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 41);
  CHECK(metrics == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "checkpoint.json") == slurp(b / "checkpoint.json"));

  // The run directory is enough to repeat an evaluation bit-identically.
  const nlohmann::json e1 = cmd_eval(read_checkpoint(a / "checkpoint.json"), 5, 3);
  const nlohmann::json e2 = cmd_eval(read_checkpoint(b / "checkpoint.json"), 5, 3);
  CHECK(e1.dump() == e2.dump());
  CHECK(e1["episodes"] == 5);
  CHECK(e1["goal_frequencies"]["per_goal"].size() == 2);

  const nlohmann::json empty = cmd_eval(read_checkpoint(a / "checkpoint.json"), 0, 3);
  CHECK(empty["episodes"] == 0);
  CHECK(empty["returns"]["mean"].is_null());
  CHECK(empty["psrf_traces"].empty());

  std::ostringstream tm;
  cmd_analyze_transition_matrix(read_checkpoint(a / "checkpoint.json"), 200, 1, tm);
  CHECK(tm.str().rfind("from,to_0,to_1,defined\n", 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("checkpoint version mismatch is an explicit error") {
  const RunConfig c = parse_run_config(kSmallRun, "small.ini");
  const fs::path dir = scratch_dir("version");
  RunConfig quick = c;
  quick.total_steps = 2;
  quick.eval_every = 0;
  quick.checkpoint_every = 0;
  cmd_train(quick, dir);
  nlohmann::json doc = nlohmann::json::parse(slurp(dir / "checkpoint.json"));
  doc["version"] = kCheckpointFormatVersion + 1;
  std::ofstream(dir / "bad.json") << doc.dump();
  CHECK_THROWS_AS(read_checkpoint(dir / "bad.json"), CheckpointError);
  std::string err;
  CHECK(call({"eval", "--checkpoint", (dir / "bad.json").string()}, nullptr, &err) == 2);
  CHECK(err.find("version") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch_dir("exit");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ini") << "[environment]\ntype = line\n[agent]\nbatch_size = -3\n";
  std::string err;
  CHECK(call({"train", "--config", (dir / "bad.ini").string(), "--out", (dir / "run").string()}, nullptr, &err) == 2);
  CHECK(err.find("config error") != std::string::npos);
  CHECK(call({"train", "--out", (dir / "run").string()}) == 2);
  CHECK(call({"frobnicate"}) == 2);

  std::ofstream(dir / "line.ini") << "[run]\ntotal_steps = 30\n[environment]\ntype = line\n"
                                  << "[agent]\npolicy_hidden = 8\ncritic_hidden = 8\nbatch_size = 8\nn_max = 8\n"
                                  << "initial_beliefs = 8\nmemory_capacity = 8\nrandom_steps = 5\n";
  CHECK(call({"train", "--config", (dir / "line.ini").string(), "--out", (dir / "run").string(), "--seed", "4"}) == 0);
  const std::string cp = (dir / "run" / "checkpoint.json").string();
  std::string out;
  CHECK(call({"analyze", "ss-hist", "--checkpoint", cp, "--bins", "10", "--samples", "500", "--out",
              (dir / "an").string()}, &out) == 0);
  CHECK(out.rfind("tv ", 0) == 0);
  CHECK(fs::exists(dir / "an" / "ss_hist.csv"));
  CHECK(call({"analyze", "psrf-trace", "--checkpoint", cp, "--episodes", "2"}, &out) == 0);
  CHECK(out.rfind("act,n,r_p\n", 0) == 0);
  CHECK(call({"analyze", "transition-matrix", "--checkpoint", cp, "--samples", "50"}, &out) == 0);
  fs::remove_all(dir);
}
