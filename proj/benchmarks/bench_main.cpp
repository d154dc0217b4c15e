#include <benchmark/benchmark.h>

#include "sspg/agent/agent.hpp"
#include "sspg/agent/buffers.hpp"
#include "sspg/diag/psrf.hpp"
#include "sspg/diff/mlp.hpp"
#include "sspg/diff/ops.hpp"
#include "sspg/error.hpp"
#include "sspg/rng.hpp"

using namespace sspg;
using diff::Matrix;

namespace {

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto rows = static_cast<Eigen::Index>(state.range(0));
  const diff::MlpSpec spec{3, {32, 32}, 4};
  diff::ParamStore store;
  Rng rng = substream(1, "bench");
  diff::mlp_init(spec, store, "net", rng);
  const Matrix x = normal_matrix(rng, rows, 3);
  for (auto _ : state) {
    diff::Tape tape;
    const diff::Var out = diff::mlp_forward(tape, spec, store, "net", tape.constant(x), diff::Binding::trainable);
    const diff::Gradients g = tape.backward(diff::sum(diff::square(out)));
    benchmark::DoNotOptimize(g);
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(256);

void BM_Psrf(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  Rng rng = substream(2, "bench");
  policy::ChainHistory chain;
  chain.state = Matrix::Zero(1, 1);
  chain.start = uniform_matrix(rng, 64, 2, -1, 1);
  for (int n = 0; n < steps; ++n) chain.steps.push_back(normal_matrix(rng, 64, 2));
  chain.noise.assign(chain.steps.size(), chain.start);
  for (auto _ : state) benchmark::DoNotOptimize(diag::psrf(chain).r_p);
}
BENCHMARK(BM_Psrf)->Arg(4)->Arg(16);

void BM_Act(benchmark::State& state) {
  set_warnings_enabled(false);
  agent::AgentConfig c;
  c.action_dim = 2;
  c.random_steps = 0;
  agent::Agent a(c, 3);
  Rng rng = substream(3, "bench");
  const Matrix s = Matrix::Zero(1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(a.act(s, rng).action);
}
BENCHMARK(BM_Act);

void BM_LearnStep(benchmark::State& state) {
  set_warnings_enabled(false);
  agent::AgentConfig c;
  c.action_dim = 2;
  agent::Agent a(c, 4);
  Rng rng = substream(4, "bench");
  agent::ReplayBuffer buffer(4096);
  for (int i = 0; i < 1024; ++i) {
    buffer.push({Matrix::Zero(1, 1), uniform_matrix(rng, 1, 2, -1, 1), -1.0, Matrix::Zero(1, 1), true});
  }
  for (auto _ : state) {
    const agent::TransitionBatch batch = buffer.sample(static_cast<std::size_t>(c.batch_size), rng);
    benchmark::DoNotOptimize(a.learn_step(batch, rng));
  }
}
BENCHMARK(BM_LearnStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
