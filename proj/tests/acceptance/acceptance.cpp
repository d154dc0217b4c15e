// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sspg/agent/agent.hpp"
#include "sspg/agent/training.hpp"
#include "sspg/diag/psrf.hpp"
#include "sspg/diff/mlp.hpp"
#include "sspg/diff/ops.hpp"
#include "sspg/envs/bandit.hpp"
#include "sspg/envs/canonical.hpp"
#include "sspg/error.hpp"
#include "test_support.hpp"

using namespace sspg;
using diff::Matrix;
using diff::Tape;
using diff::Var;
using policy::ChainHistory;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ChainHistory chain_of_steps(const std::vector<Matrix>& steps) {
  ChainHistory c;
  c.state = Matrix::Zero(1, 1);
  c.start = Matrix::Zero(steps.front().rows(), steps.front().cols());
  c.steps = steps;
  c.noise.assign(steps.size(), c.start);
  return c;
}

// ---------------------------------------------------------------------------

Outcome psrf_hand_value() {
  // Chains [0,1,2] and [1,2,3].
  Matrix s1(2, 1), s2(2, 1), s3(2, 1);
  s1 << 0, 1;
  s2 << 1, 2;
  s3 << 2, 3;
  const double r = diag::psrf(chain_of_steps({s1, s2, s3})).r_p;
  const double expect = std::sqrt(2.0 / 3.0 + 0.5);
  const double err = std::abs(r - expect);
  return {err <= 1e-12, "R^p=" + fmt("%.15f", r) + " expected=" + fmt("%.15f", expect) + " err=" + fmt("%.2e", err)};
}

Outcome psrf_statistical() {
  int mixed_pass = 0, offset_pass = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = substream(static_cast<std::uint64_t>(trial), "psrf-sanity");
    std::vector<Matrix> steps;
    for (int n = 0; n < 512; ++n) steps.push_back(normal_matrix(rng, 64, 1));
    if (diag::psrf(chain_of_steps(steps)).r_p < 1.1) ++mixed_pass;

    std::vector<Matrix> off;
    for (int n = 0; n < 512; ++n) {
      Matrix s = normal_matrix(rng, 2, 1);
      s(1, 0) += 5.0;
      off.push_back(s);
    }
    if (diag::psrf(chain_of_steps(off)).r_p > 1.1) ++offset_pass;
  }
  return {mixed_pass >= 99 && offset_pass == 100,
          "mixed below 1.1: " + std::to_string(mixed_pass) + "/100, offset above 1.1: " + std::to_string(offset_pass) +
              "/100"};
}

Outcome gradient_finite_difference() {
  const int batch = 8;
  const double h = 1e-5, alpha = 0.2;
  Rng init = substream(31, "fd-init");
  const policy::BTPolicy frozen(policy::BTPolicyConfig{1, 1, {16, 16}, -5.0, 2.0}, init);
  critic::SoftQConfig qc;
  qc.hidden = {16, 16};
  const critic::SoftQEnsemble critic(qc, init);
  const agent::ValueFn q = [&](Tape& t, const Var& s, const Var& a) {
    return critic.aggregate(t, s, a, diff::Binding::stopped);
  };
  double worst = 0.0;
  std::size_t coords = 0;
  for (int horizon : {1, 3, 6}) {
    Rng rng = substream(static_cast<std::uint64_t>(horizon), "fd-noise");
    const Matrix states = normal_matrix(rng, batch, 1);
    const Matrix seeds = uniform_matrix(rng, batch, 1, -0.9, 0.9);
    std::vector<Matrix> noise;
    for (int i = 0; i <= horizon; ++i) noise.push_back(normal_matrix(rng, batch, 1));
    agent::PolicyLossOptions opt;
    opt.horizon = horizon;
    opt.alpha = alpha;
    Tape tape;
    const agent::PolicyLoss base = agent::policy_gradient_loss(tape, frozen, frozen, q, states, seeds, noise, opt);
    const diff::Gradients g = tape.backward(base.loss);
    // The mixture components are detached in the objective, so the perturbed
    // evaluations hold them at their unperturbed values.
    agent::PolicyLossOptions held = opt;
    held.component_sources.push_back(seeds);
    for (const Var& b : base.beliefs) held.component_sources.push_back(b.value());
    auto loss_at = [&](const policy::BTPolicy& live) {
      Tape t;
      return agent::policy_gradient_loss(t, live, frozen, q, states, seeds, noise, held).loss.scalar();
    };
    for (const std::string& name : frozen.params().names()) {
      const Matrix& analytic = g.at(name);
      policy::BTPolicy live = frozen;
      Matrix& p = live.params().mutable_value(name);
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double orig = p.data()[i];
        p.data()[i] = orig + h;
        const double up = loss_at(live);
        p.data()[i] = orig - h;
        const double down = loss_at(live);
        p.data()[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, testing::relative_error(analytic.data()[i], fd));
        ++coords;
      }
    }
  }
  return {worst <= 1e-4, std::to_string(coords) + " coordinates over horizons {1,3,6}, max relative error " +
                             fmt("%.2e", worst)};
}

Outcome ar1_oracle() {
  Rng setting_rng = substream(41, "ar1-settings");
  const Eigen::Index chunk = 2000;
  const int chunks = 50;  // 1e5 draws
  int agree = 0, total = 0;
  std::ostringstream detail;
  for (int s = 0; s < 5; ++s) {
    const double t0 = uniform_matrix(setting_rng, 1, 1, -1.0, 1.0)(0, 0);
    const double t1 = uniform_matrix(setting_rng, 1, 1, -0.9, 0.9)(0, 0);
    const double sigma = uniform_matrix(setting_rng, 1, 1, 0.1, 1.0)(0, 0);
    const double m = t0 / (1.0 - t1), v = sigma * sigma / (1.0 - t1 * t1);
    const double exact[3] = {-2.0 * m / (1.0 - t1), -2.0 * m * m / (1.0 - t1) - 2.0 * t1 * v / (1.0 - t1 * t1),
                             -2.0 * sigma / (1.0 - t1 * t1)};
    const int horizon = std::max(1, static_cast<int>(std::ceil(std::log(1e-12) / std::log(std::abs(t1)))));

    const testing::LinearKernel live(t0, t1, sigma, chunk), frozen(t0, t1, sigma, 1);
    const agent::ValueFn q = [](Tape&, const Var&, const Var& a) { return diff::neg(diff::square(a)); };
    agent::PolicyLossOptions opt;
    opt.horizon = horizon;
    Rng rng = substream(static_cast<std::uint64_t>(s), "ar1-noise");
    double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
    const char* names[3] = {"ar/t0", "ar/t1", "ar/sigma"};
    for (int c = 0; c < chunks; ++c) {
      const Matrix seeds = (normal_matrix(rng, chunk, 1).array() * std::sqrt(v) + m).matrix();
      std::vector<Matrix> noise;
      for (int i = 0; i <= horizon; ++i) noise.push_back(normal_matrix(rng, chunk, 1));
      Tape tape;
      const Var loss = agent::policy_gradient_loss(tape, live, frozen, q, Matrix::Zero(1, 1), seeds, noise, opt).loss;
      const diff::Gradients g = tape.backward(loss);
      for (int k = 0; k < 3; ++k) {
        // The loss is a batch mean of the negated objective; per-row estimates are -B * row gradient.
        const Matrix est = -static_cast<double>(chunk) * g.at(names[k]);
        sum[k] += est.sum();
        sq[k] += est.squaredNorm();
      }
    }
    const double n = static_cast<double>(chunk) * chunks;
    detail << " [t0=" << fmt("%.2f", t0) << " t1=" << fmt("%.2f", t1) << " s=" << fmt("%.2f", sigma) << ":";
    for (int k = 0; k < 3; ++k) {
      const double mean = sum[k] / n;
      const double se = std::sqrt(std::max(0.0, sq[k] / n - mean * mean) / n);
      const double z = se > 0.0 ? std::abs(mean - exact[k]) / se : (mean == exact[k] ? 0.0 : INFINITY);
      agree += z <= 3.0;
      ++total;
      detail << " z=" << fmt("%.2f", z);
    }
    detail << "]";
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " gradient entries within 3 SE" +
                              detail.str()};
}

// A random bistable kernel: pre-squash mean kappa * a + c plus a small random
// network, so mass leaks slowly from the well it starts in.
policy::BTPolicy random_bistable_policy(Rng& rng) {
  policy::BTPolicy p(policy::BTPolicyConfig{1, 1, {16, 16}, -5.0, 2.0}, rng);
  auto& store = p.params();
  for (const auto& name : store.names()) store.mutable_value(name) *= 0.1;
  const double kappa = uniform_matrix(rng, 1, 1, 1.3, 1.8)(0, 0);
  const double log_std = uniform_matrix(rng, 1, 1, -1.0, -0.6)(0, 0);
  const double c = uniform_matrix(rng, 1, 1, 0.1, 0.2)(0, 0);
  const std::string pre = policy::BTPolicy::kPrefix;
  store.mutable_value(diff::weight_name(pre, 0))(1, 0) = 1.0;  // hidden unit 0 carries a + 1
  store.mutable_value(diff::bias_name(pre, 0))(0, 0) = 1.0;
  store.mutable_value(diff::weight_name(pre, 1))(0, 0) = 1.0;
  store.mutable_value(diff::bias_name(pre, 1))(0, 0) = 0.0;
  store.mutable_value(diff::weight_name(pre, 2))(0, 0) = kappa;
  store.mutable_value(diff::bias_name(pre, 2))(0, 0) = c - kappa;
  store.mutable_value(diff::bias_name(pre, 2))(0, 1) = p.raw_for_log_std(log_std);
  return p;
}

Outcome mixing_decay() {
  const int bins = 10;
  const int ns[4] = {1, 9, 17, 25};
  Rng family = substream(51, "mixing-family");
  int decreasing = 0;
  std::ostringstream detail;
  for (int k = 0; k < 10; ++k) {
    const policy::BTPolicy p = random_bistable_policy(family);
    Rng rng = substream(static_cast<std::uint64_t>(k), "mixing-chains");
    const ChainHistory ch = policy::simulate_chain(p, Matrix::Zero(1, 1), Matrix::Constant(8192, 1, -0.9), 33, rng);
    double tv[4];
    for (int i = 0; i < 4; ++i) {
      const Matrix& a = ch.steps[ns[i] - 1];
      const Matrix& b = ch.steps[ns[i] + 7];
      tv[i] = envs::total_variation(envs::histogram({a.data(), a.data() + a.size()}, -1.0, 1.0, bins),
                                    envs::histogram({b.data(), b.data() + b.size()}, -1.0, 1.0, bins));
    }
    const bool dec = tv[0] > tv[1] && tv[1] > tv[2] && tv[2] > tv[3];
    decreasing += dec;
    detail << " " << (dec ? "" : "!") << fmt("%.3f", tv[0]) << ">" << fmt("%.3f", tv[3]);
  }
  return {decreasing >= 9, std::to_string(decreasing) + "/10 strictly decreasing; TV(1)>TV(25):" + detail.str()};
}

// ---------------------------------------------------------------------------
// Trained bandit agents.

agent::AgentConfig bandit_config(int action_dim) {
  agent::AgentConfig c;
  c.action_dim = action_dim;
  c.policy_hidden = {32, 32};
  c.critic_hidden = {32, 32};
  c.ensemble = 1;
  c.utd = 1;
  c.random_steps = 50;
  c.learning_starts = 50;
  c.alpha = 0.1;
  c.policy_lr = 1e-3;
  c.critic_lr = 1e-3;
  return c;
}

struct TrainedRun {
  agent::Agent agent;
  double mean_converged_length = 0.0;
};

TrainedRun train_bandit(envs::PositionalBandit env, std::uint64_t seed) {
  agent::Agent a(bandit_config(env.action_dim()), seed);
  agent::RunStreams streams(seed);
  double sum = 0.0;
  int count = 0;
  agent::train(a, env, agent::TrainingConfig{1000, 1'000'000}, streams, [&](const agent::StepRecord& r) {
    if (r.act.random) return;
    sum += r.act.converged_length;
    ++count;
  });
  return TrainedRun{std::move(a), count ? sum / count : 0.0};
}

std::vector<double> nearest_goal_frequencies(agent::Agent a, const envs::PositionalBandit& env, int episodes,
                                             std::uint64_t seed) {
  Rng rng = substream(seed, "eval-policy");
  std::vector<double> freq(env.goal_count(), 0.0);
  const Matrix state = Matrix::Zero(1, 1);
  for (int e = 0; e < episodes; ++e) freq[env.nearest_goal(a.act(state, rng).action)] += 1.0 / episodes;
  return freq;
}

constexpr int kSeeds = 5;

Outcome one_d_histogram() {
  const envs::PositionalBandit env = envs::PositionalBandit::line();
  const int bins = 40;
  const envs::GridDensity oracle = envs::canonical_density(
      envs::Grid{-1.0, 1.0, 200 * bins + 1}, [&](double x) { return env.reward(Matrix::Constant(1, 1, x)); }, 0.1);
  const std::vector<double> mass = oracle.bin_masses(bins);
  std::vector<double> tvs;
  std::ostringstream detail;
  for (int s = 1; s <= kSeeds; ++s) {
    const TrainedRun run = train_bandit(env, static_cast<std::uint64_t>(s));
    Rng rng = substream(static_cast<std::uint64_t>(s), "ss-samples");
    const Matrix x = policy::sample_steady_state(run.agent.policy(), Matrix::Zero(1, 1), 10000, 64, rng);
    const double tv = envs::total_variation(envs::histogram({x.data(), x.data() + x.size()}, -1.0, 1.0, bins), mass);
    tvs.push_back(tv);
    detail << " " << fmt("%.3f", tv);
  }
  const double med = median(tvs);
  return {med <= 0.15, "median TV " + fmt("%.3f", med) + " (seeds:" + detail.str() + ")"};
}

struct MultiGoalResults {
  std::vector<std::vector<std::vector<double>>> freq;  // [bandit][seed][goal]
  std::vector<std::vector<double>> n_bar;              // [bandit][seed]
  std::vector<int> goals;
  std::optional<agent::Agent> three_goal_agent;
};

MultiGoalResults train_multi_goal() {
  MultiGoalResults out;
  out.goals = {1, 2, 3, 4};
  for (int g : out.goals) {
    const envs::PositionalBandit env = envs::PositionalBandit::circle(g);
    std::vector<std::vector<double>> freqs;
    std::vector<double> nbar;
    for (int s = 1; s <= kSeeds; ++s) {
      TrainedRun run = train_bandit(env, static_cast<std::uint64_t>(s));
      nbar.push_back(run.mean_converged_length);
      freqs.push_back(nearest_goal_frequencies(run.agent, env, 1000, static_cast<std::uint64_t>(s)));
      if (g == 3 && s == 1) out.three_goal_agent.emplace(run.agent);
    }
    out.freq.push_back(freqs);
    out.n_bar.push_back(nbar);
  }
  return out;
}

Outcome goal_coverage(const MultiGoalResults& r) {
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t b = 0; b < r.goals.size(); ++b) {
    const int g = r.goals[b];
    if (g < 2) continue;
    detail << " G=" << g << ":";
    for (int k = 0; k < g; ++k) {
      std::vector<double> per_seed;
      for (const auto& f : r.freq[b]) per_seed.push_back(f[k]);
      const double med = median(per_seed);
      const bool in = med >= 0.5 / g && med <= 2.0 / g;
      ok = ok && in;
      detail << " " << (in ? "" : "!") << fmt("%.3f", med);
    }
  }
  return {ok, "median per-goal visit frequency in [0.5/G, 2/G];" + detail.str()};
}

Outcome transition_cycle(const MultiGoalResults& r) {
  const envs::PositionalBandit env = envs::PositionalBandit::circle(3);
  Rng rng = substream(1, "transition-matrix");
  const envs::QuantizedTransitions t =
      envs::quantized_transition_matrix(r.three_goal_agent->policy(), Matrix::Zero(1, 1), env, 0.3, 10000, rng);
  bool ok = true;
  std::vector<int> successor(3, -1);
  std::ostringstream detail;
  for (int g = 0; g < 3; ++g) {
    if (!t.defined[g]) {
      ok = false;
      detail << " row " << g << " undefined";
      continue;
    }
    Eigen::Index arg = 0;
    const double top = t.probabilities.row(g).maxCoeff(&arg);
    successor[g] = static_cast<int>(arg);
    ok = ok && top >= 0.9 && arg != g;
    detail << " " << g << "->" << arg << " (" << fmt("%.3f", top) << ")";
  }
  std::vector<int> sorted = successor;
  std::sort(sorted.begin(), sorted.end());
  ok = ok && sorted == std::vector<int>{0, 1, 2};
  return {ok, "row maxima:" + detail.str()};
}

Outcome adaptive_steps(const MultiGoalResults& r) {
  std::vector<double> med;
  std::ostringstream detail;
  for (std::size_t b = 0; b < r.goals.size(); ++b) {
    if (r.goals[b] == 3) continue;
    med.push_back(median(r.n_bar[b]));
    detail << " G=" << r.goals[b] << ": " << fmt("%.4f", med.back());
  }
  const bool ok = med[0] <= med[1] && med[1] <= med[2];
  return {ok, "median mean converged length;" + detail.str()};
}

// ---------------------------------------------------------------------------
// Invariants.

Outcome invariants() {
  std::vector<std::string> failures;
  auto require = [&](bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  };

  {  // PSRF affine invariance
    Rng rng = substream(61, "affine");
    std::vector<Matrix> steps;
    for (int n = 0; n < 30; ++n) {
      Matrix s = normal_matrix(rng, 6, 2);
      s.bottomRows(3).array() += 0.8;
      steps.push_back(s);
    }
    const ChainHistory c = chain_of_steps(steps);
    Matrix a(2, 2);
    a << 2.0, 0.3, -0.7, 1.5;
    Eigen::RowVector2d shift(0.4, -3.0);
    std::vector<Matrix> moved;
    for (const Matrix& s : steps) moved.push_back((s * a).rowwise() + shift);
    require(std::abs(diag::psrf(chain_of_steps(moved)).r_p - diag::psrf(c).r_p) < 1e-8, "psrf affine invariance");
  }
  {  // Transition density normalizes
    Rng rng = substream(62, "density");
    const policy::BTPolicy p(policy::BTPolicyConfig{1, 1, {16, 16}, -5.0, 2.0}, rng);
    const int n = 20001;
    const double lo = -12.0, hi = 12.0, hstep = (hi - lo) / (n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = std::tanh(lo + hstep * i);
      if (std::abs(x) > 1.0 - policy::kAtanhClip) continue;
      total += std::exp(policy::log_prob(p, Matrix::Zero(1, 1), Matrix::Constant(1, 1, -0.3), Matrix::Constant(1, 1, x))) *
               (1.0 - x * x) * hstep;
    }
    require(std::abs(total - 1.0) < 1e-3, "density normalization (" + fmt("%.6f", total) + ")");
  }
  {  // Gradient-stop audits
    agent::AgentConfig c = bandit_config(2);
    c.policy_hidden = c.critic_hidden = {8};
    agent::Agent a(c, 63);
    Rng rng = substream(63, "audit");
    Tape tape;
    const agent::PolicyLoss pl =
        a.policy_gradient_loss(tape, Matrix::Zero(4, 1), uniform_matrix(rng, 4, 2, -0.9, 0.9), rng);
    const diff::Gradients g = tape.backward(pl.loss);
    bool ok = true;
    for (const auto& [name, m] : g) {
      const bool is_policy = name.rfind(policy::BTPolicy::kPrefix, 0) == 0;
      ok = ok && (is_policy ? m.norm() > 0.0 : m.norm() == 0.0);
    }
    Tape t2;
    const Var bl = a.critic().bellman_loss(t2, Matrix::Zero(4, 1), Matrix::Zero(4, 2), Matrix::Ones(4, 1));
    for (const auto& [name, m] : t2.backward(bl)) ok = ok && name.rfind(critic::SoftQEnsemble::kOnlinePrefix, 0) == 0;
    require(ok, "gradient-stop audit");
  }
  {  // Buffer capacities under churn
    agent::ShortTermActionMemory mem(16, 2);
    agent::ReplayBuffer replay(50);
    Rng rng = substream(64, "churn");
    bool ok = true;
    int pushed = 0;
    for (int i = 0; i < 500; ++i) {
      const int rows = static_cast<int>(uniform_index(rng, 40)) + 1;
      const Matrix batch = uniform_matrix(rng, rows, 2, -0.9, 0.9);
      mem.push(batch);
      pushed += rows;
      ok = ok && mem.size() == std::min(16, pushed);
      ok = ok && mem.contents().bottomRows(std::min(16, rows)) == batch.bottomRows(std::min(16, rows));
      replay.push(agent::Transition{Matrix::Zero(1, 1), Matrix::Zero(1, 2), double(i), Matrix::Zero(1, 1), true});
      ok = ok && replay.size() == std::min<std::size_t>(static_cast<std::size_t>(i) + 1, 50);
      ok = ok && replay.at(0).reward == std::max(0, i - 49);
    }
    require(ok, "buffer capacity");
  }
  {  // Determinism under a seed
    auto losses = [](std::uint64_t seed) {
      agent::AgentConfig c = bandit_config(1);
      c.policy_hidden = c.critic_hidden = {16};
      c.batch_size = 32;
      agent::Agent a(c, seed);
      envs::PositionalBandit env = envs::PositionalBandit::line();
      agent::RunStreams streams(seed);
      std::vector<double> out;
      agent::train(a, env, agent::TrainingConfig{120, 1000}, streams, [&](const agent::StepRecord& r) {
        for (const auto& l : r.losses) {
          out.push_back(l.policy_loss);
          out.push_back(l.critic_loss);
        }
      });
      return out;
    };
    const auto x = losses(65), y = losses(65);
    require(!x.empty() && x == y, "determinism under seed");
  }
  std::string detail = "affine invariance, density quadrature, gradient stops, buffer capacity, determinism";
  if (!failures.empty()) {
    detail = "failed:";
    for (const auto& f : failures) detail += " " + f + ";";
  }
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  set_warnings_enabled(false);
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto selected = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    if (!selected(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2d %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "psrf-hand-value", psrf_hand_value);
  report(2, "psrf-statistical-sanity", psrf_statistical);
  report(3, "gradient-finite-difference", gradient_finite_difference);
  report(4, "ar1-analytic-gradient", ar1_oracle);
  report(5, "chain-mixing-decay", mixing_decay);
  report(6, "one-d-bandit-histogram", one_d_histogram);

  MultiGoalResults multi;
  std::string multi_error;
  if (selected(7) || selected(8) || selected(9)) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      multi = train_multi_goal();
    } catch (const std::exception& e) {
      multi_error = e.what();
    }
    std::printf("     (trained 1/2/3/4-goal bandits x %d seeds in %.1fs)\n", kSeeds,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  auto guarded = [&](Outcome (*fn)(const MultiGoalResults&)) {
    return [&, fn] {
      if (!multi_error.empty()) return Outcome{false, "training failed: " + multi_error};
      return fn(multi);
    };
  };
  report(7, "multi-goal-coverage", guarded(goal_coverage));
  report(8, "three-goal-transition-cycle", guarded(transition_cycle));
  report(9, "adaptive-reasoning-length", guarded(adaptive_steps));
  report(10, "invariant-suite", invariants);

  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
