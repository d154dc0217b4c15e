#include <doctest.h>

#include <cmath>

#include "sspg/critic/soft_q.hpp"
#include "sspg/diff/mlp.hpp"
#include "sspg/error.hpp"

using namespace sspg;
using namespace sspg::critic;

namespace {

SoftQEnsemble make_critic(int ensemble = 1, double penalty = 0.0, double polyak = 0.5, std::uint64_t seed = 1) {
  Rng rng = substream(seed, "init-critic");
  SoftQConfig cfg;
  cfg.state_dim = 2;
  cfg.action_dim = 1;
  cfg.hidden = {8};
  cfg.ensemble = ensemble;
  cfg.penalty = penalty;
  cfg.polyak = polyak;
  cfg.adam.learning_rate = 1e-2;
  return SoftQEnsemble(cfg, rng);
}

}  // namespace

TEST_CASE("delayed copy starts equal to the online network") {
  const SoftQEnsemble q = make_critic(2);
  Rng rng = substream(2, "x");
  const Matrix s = normal_matrix(rng, 5, 2), a = uniform_matrix(rng, 5, 1, -1, 1);
  CHECK(q.q_eval(s, a, false).members.isApprox(q.q_eval(s, a, true).members));
}

TEST_CASE("aggregate is the member mean minus the penalized population std") {
  const SoftQEnsemble q = make_critic(3, 0.7);
  Rng rng = substream(3, "x");
  const Matrix s = normal_matrix(rng, 4, 2), a = uniform_matrix(rng, 4, 1, -1, 1);
  const QValues v = q.q_eval(s, a, false);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double mu = v.members.row(i).mean();
    const double sd = std::sqrt((v.members.row(i).array() - mu).square().mean());
    CHECK(v.aggregate(i, 0) == doctest::Approx(mu - 0.7 * sd).epsilon(1e-12));
  }
}

TEST_CASE("single state row broadcasts over the action batch") {
  const SoftQEnsemble q = make_critic();
  Rng rng = substream(4, "x");
  const Matrix s = normal_matrix(rng, 1, 2), a = uniform_matrix(rng, 6, 1, -1, 1);
  CHECK(q.q_eval(s, a, false).aggregate.isApprox(q.q_eval(s.replicate(6, 1), a, false).aggregate));
}

TEST_CASE("Bellman target") {
  const SoftQEnsemble q = make_critic(2, 0.5);
  Rng rng = substream(5, "x");
  const Matrix s2 = normal_matrix(rng, 3, 2), a2 = uniform_matrix(rng, 3, 1, -1, 1);
  const Matrix r = (Matrix(3, 1) << 1.0, -2.0, 0.5).finished();
  const Matrix logpi = (Matrix(3, 1) << -0.3, 0.2, 1.0).finished();

  SUBCASE("terminal transitions and gamma 0 return the reward") {
    CHECK(q.bellman_target(r, Matrix::Ones(3, 1), 0.99, s2, a2, logpi, 0.2) == r);
    CHECK(q.bellman_target(r, Matrix::Zero(3, 1), 0.0, s2, a2, logpi, 0.2) == r);
  }
  SUBCASE("non-terminal rows bootstrap from the delayed aggregate") {
    const Matrix done = (Matrix(3, 1) << 0.0, 1.0, 0.0).finished();
    const Matrix t = q.bellman_target(r, done, 0.9, s2, a2, logpi, 0.2);
    const Matrix qd = q.q_eval(s2, a2, true).aggregate;
    CHECK(t(0, 0) == doctest::Approx(1.0 + 0.9 * (qd(0, 0) + 0.2 * 0.3)));
    CHECK(t(1, 0) == -2.0);
    CHECK(t(2, 0) == doctest::Approx(0.5 + 0.9 * (qd(2, 0) - 0.2 * 1.0)));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(q.bellman_target(r, Matrix::Zero(2, 1), 0.9, s2, a2, logpi, 0.2), DimensionError);
  }
}

TEST_CASE("repeated Bellman updates fit a fixed target") {
  SoftQEnsemble q = make_critic(2);
  Rng rng = substream(6, "x");
  const Matrix s = normal_matrix(rng, 32, 2), a = uniform_matrix(rng, 32, 1, -1, 1);
  const Matrix target = Matrix::Constant(32, 1, 0.8);
  const double first = q.bellman_update(s, a, target).loss;
  double last = first;
  for (int i = 0; i < 300; ++i) last = q.bellman_update(s, a, target).loss;
  CHECK(last < 0.05 * first);
  // Only the online network moved.
  CHECK_FALSE(q.q_eval(s, a, false).members.isApprox(q.q_eval(s, a, true).members));
}

TEST_CASE("Bellman update refuses a non-finite loss and leaves parameters unchanged") {
  SoftQEnsemble q = make_critic();
  const ParamStore before = q.online();
  Matrix target = Matrix::Zero(2, 1);
  target(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(q.bellman_update(Matrix::Zero(2, 2), Matrix::Zero(2, 1), target), NumericError);
  for (const auto& [name, p] : before.entries()) CHECK(q.online().value(name) == p.value);
}

TEST_CASE("Bellman loss gradients touch only the online critic") {
  const SoftQEnsemble q = make_critic(2);
  diff::Tape tape;
  const diff::Var loss = q.bellman_loss(tape, Matrix::Zero(3, 2), Matrix::Zero(3, 1), Matrix::Ones(3, 1));
  const diff::Gradients g = tape.backward(loss);
  CHECK(g.size() == q.online().size());
  for (const auto& [name, m] : g) CHECK(name.rfind(SoftQEnsemble::kOnlinePrefix, 0) == 0);
  for (const auto& [name, m] : g) CHECK(name.rfind(SoftQEnsemble::kDelayedPrefix, 0) != 0);
}

TEST_CASE("Polyak averaging") {
  SoftQEnsemble q = make_critic(1, 0.0, 0.75);
  for (auto& name : q.online().names()) q.online().mutable_value(name).array() += 1.0;
  const ParamStore delayed_before = q.delayed();
  q.polyak_update();
  for (const auto& name : q.online().names()) {
    const std::string off = std::string(SoftQEnsemble::kDelayedPrefix) +
                            name.substr(std::string(SoftQEnsemble::kOnlinePrefix).size());
    const Matrix expect = 0.75 * delayed_before.value(off) + 0.25 * q.online().value(name);
    CHECK(q.delayed().value(off).isApprox(expect, 1e-14));
  }
}

TEST_CASE("config validation") {
  SoftQConfig cfg;
  cfg.ensemble = 0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = SoftQConfig{};
  cfg.polyak = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = SoftQConfig{};
  cfg.penalty = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
}
