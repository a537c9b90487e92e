#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "aislab/ais.hpp"
#include "aislab/error.hpp"
#include "aislab/neural_ais.hpp"
#include "finite_diff.hpp"
#include "oracles.hpp"

using namespace aislab;

namespace {

std::vector<Episode> rollouts(const Environment& env, int n, int horizon, Rng& rng) {
  std::vector<Episode> out;
  for (int i = 0; i < n; ++i) {
    Episode ep;
    ep.states.push_back(env.start(rng));
    for (int t = 0; t < horizon; ++t) {
      const Action a = random_action(env, rng);
      StepResult r = env.step(ep.states.back(), a, rng);
      ep.actions.push_back(a);
      ep.rewards.push_back(r.reward);
      ep.states.push_back(r.state);
    }
    out.push_back(ep);
  }
  return out;
}

TabularEnv toy_env(int horizon = 50) { return TabularEnv(toy_mdp(), {0}, horizon, "toy"); }

/// Random MDP whose states come in blocks of exact duplicates.
TabularMdp planted_mdp(const std::vector<int>& block, int n_actions, Rng& rng) {
  const int n = static_cast<int>(block.size());
  const int k = *std::max_element(block.begin(), block.end()) + 1;
  std::vector<Eigen::MatrixXd> p;
  Eigen::MatrixXd r(n, n_actions);
  Eigen::MatrixXd block_r = Eigen::MatrixXd::Random(k, n_actions);
  for (int a = 0; a < n_actions; ++a) {
    Eigen::MatrixXd rows(k, n);
    for (int z = 0; z < k; ++z) rows.row(z) = oracle::random_simplex(n, rng).transpose();
    Eigen::MatrixXd pa(n, n);
    for (int s = 0; s < n; ++s) {
      pa.row(s) = rows.row(block[static_cast<std::size_t>(s)]);
      r(s, a) = block_r(block[static_cast<std::size_t>(s)], a);
    }
    p.push_back(pa);
  }
  return TabularMdp(p, r, 0.9);
}

bool refines(const std::vector<int>& fine, const std::vector<int>& coarse) {
  for (std::size_t i = 0; i < fine.size(); ++i)
    for (std::size_t j = 0; j < fine.size(); ++j)
      if (fine[i] == fine[j] && coarse[i] != coarse[j]) return false;
  return true;
}

std::vector<std::vector<int>> all_partitions(int n) {
  std::vector<std::vector<int>> out;
  for (int k = 1; k <= n; ++k)
    for (auto& p : partitions_into(n, k)) out.push_back(p);
  return out;
}

}  // namespace

TEST_CASE("identity generator steps to the next state and has zero constants") {
  const TabularMdp mdp = toy_mdp();
  const TabularAisGenerator gen = identity_ais(mdp);
  for (int z = 0; z < 4; ++z)
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 3; ++a) CHECK(ais_step(gen, z, s, a) == s);
  for (BoundIpm ipm : {BoundIpm::tv, BoundIpm::wasserstein, BoundIpm::mmd}) {
    const EpsDelta ed = measure_eps_delta(mdp, gen, ipm);
    CHECK(ed.eps == 0.0);
    CHECK(ed.delta < 1e-12);
  }
  CHECK_THROWS_AS(ais_step(gen, 7, 0, 0), ClosureError);
}

TEST_CASE("toy quantizer constants") {
  for (double k : {100.0, 10.0, 3.0}) {
    const TabularMdp mdp = toy_mdp(k);
    const TabularAisGenerator gen = quantizer_ais(mdp, {0, 0, 1, 1});
    const EpsDelta tv = measure_eps_delta(mdp, gen, BoundIpm::tv);
    CHECK(tv.eps == doctest::Approx(0.5 * (1.0 + k)));
    // discrete-metric W equals half the L1 distance
    const EpsDelta w = measure_eps_delta(mdp, gen, BoundIpm::wasserstein);
    CHECK(w.delta == doctest::Approx(0.5 * tv.delta).epsilon(1e-12));
    CHECK(w.eps == tv.eps);
  }
}

TEST_CASE("W delta under the discrete metric equals tv_std delta on random instances") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const TabularMdp mdp = random_mdp(5, 2, 100 + trial);
    std::uniform_int_distribution<int> cls(0, 2);
    std::vector<int> part{0, 1, 2, 0, 0};
    for (int s = 3; s < 5; ++s) part[static_cast<std::size_t>(s)] = cls(rng);
    const TabularAisGenerator gen = quantizer_ais(mdp, part);
    double tv_std = 0.0;
    for (const auto& [s, z] : reachable_pairs(mdp, gen).nodes)
      for (int a = 0; a < 2; ++a)
        tv_std = std::max(tv_std, ipm::tv_std(ipm::DiscreteDist::on_ids(mdp.row(s, a).transpose()),
                                              ipm::DiscreteDist::on_ids(gen.p_hat(z, a).transpose())));
    CHECK(measure_eps_delta(mdp, gen, BoundIpm::wasserstein).delta == doctest::Approx(tv_std).epsilon(1e-10));
  }
}

TEST_CASE("quantizer examples") {
  const TabularMdp two({Eigen::MatrixXd::Identity(2, 2)}, (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished(), 0.9);
  CHECK(measure_eps_delta(two, quantizer_ais(two, {0, 0}), BoundIpm::tv).eps == doctest::Approx(0.5));

  const TabularMdp mdp = random_mdp(6, 3, 5);
  const EpsDelta id = measure_eps_delta(mdp, quantizer_ais(mdp, {0, 1, 2, 3, 4, 5}), BoundIpm::mmd);
  CHECK(id.eps == 0.0);
  CHECK(id.delta < 1e-12);

  CHECK_THROWS_AS(quantizer_ais(mdp, {0, 0, 2, 2, 2, 2}), InputError);
  CHECK_THROWS_AS(quantizer_ais(mdp, {0, 1}), InputError);
  CHECK_THROWS_AS(quantizer_ais(mdp, {0, 0, 1, 1, 1, 1}, Eigen::VectorXd::Zero(6)), InputError);
}

TEST_CASE("quantizer transition rows are entrywise inside the class hull") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const TabularMdp mdp = random_mdp(6, 2, 200 + trial);
    const std::vector<int> part{0, 1, 0, 2, 1, 0};
    Eigen::VectorXd w(6);
    for (int i = 0; i < 6; ++i) w(i) = 0.1 + std::uniform_real_distribution<double>(0, 1)(rng);
    const TabularAisGenerator gen = quantizer_ais(mdp, part, trial % 2 ? std::optional<Eigen::VectorXd>(w) : std::nullopt);
    for (int z = 0; z < 3; ++z)
      for (int a = 0; a < 2; ++a) {
        CHECK(gen.p_hat(z, a).sum() == doctest::Approx(1.0).epsilon(1e-14));
        for (int j = 0; j < 6; ++j) {
          double lo = INFINITY;
          double hi = -INFINITY;
          for (int s = 0; s < 6; ++s) {
            if (part[static_cast<std::size_t>(s)] != z) continue;
            lo = std::min(lo, mdp.prob(s, a, j));
            hi = std::max(hi, mdp.prob(s, a, j));
          }
          CHECK(gen.p_hat(z, a)(j) >= lo - 1e-14);
          CHECK(gen.p_hat(z, a)(j) <= hi + 1e-14);
        }
      }
  }
}

TEST_CASE("quantizer constants vanish exactly when the partition refines the duplicate classes") {
  Rng rng(17);
  const std::vector<std::vector<int>> blocks{{0, 0, 1, 2, 2}, {0, 1, 1, 1, 2}, {0, 1, 0, 1, 0}, {0, 1, 2, 3, 4}};
  for (const auto& block : blocks) {
    const TabularMdp mdp = planted_mdp(block, 2, rng);
    int zero = 0;
    for (const auto& part : all_partitions(5)) {
      const EpsDelta ed = measure_eps_delta(mdp, quantizer_ais(mdp, part), BoundIpm::tv);
      const bool vanishes = ed.eps < 1e-12 && ed.delta < 1e-12;
      CHECK(vanishes == refines(part, block));
      zero += vanishes;
    }
    CHECK(zero > 0);
  }
}

TEST_CASE("partitions_into counts match Stirling numbers of the second kind") {
  CHECK(partitions_into(4, 2).size() == 7);
  CHECK(partitions_into(5, 3).size() == 25);
  CHECK(partitions_into(6, 1).size() == 1);
  CHECK(all_partitions(5).size() == 52);
  std::set<std::vector<int>> unique;
  for (const auto& p : partitions_into(6, 3)) unique.insert(p);
  CHECK(unique.size() == 90);
}

TEST_CASE("tabular generators are recursively updatable") {
  // Features remember the previous state: z = (prev, cur) encoded as prev * 4 + cur.
  const TabularMdp mdp = toy_mdp();
  const int n = 4;
  std::vector<int> init(n);
  for (int s = 0; s < n; ++s) init[static_cast<std::size_t>(s)] = s * n + s;
  std::vector<int> upd(static_cast<std::size_t>(n * n * n * 3));
  for (int z = 0; z < n * n; ++z)
    for (int s = 0; s < n; ++s)
      for (int a = 0; a < 3; ++a) upd[static_cast<std::size_t>((z * n + s) * 3 + a)] = (z % n) * n + s;
  Eigen::MatrixXd r_hat(n * n, 3);
  std::vector<Eigen::MatrixXd> p_hat(3, Eigen::MatrixXd(n * n, n));
  for (int z = 0; z < n * n; ++z)
    for (int a = 0; a < 3; ++a) {
      r_hat(z, a) = mdp.reward(z % n, a);
      p_hat[static_cast<std::size_t>(a)].row(z) = mdp.row(z % n, a);
    }
  const TabularAisGenerator gen(n, 3, n * n, init, upd, r_hat, p_hat);

  // Every history of length <= 4 from every start; histories ending in the
  // same (z, s', a) must agree on the next feature.
  std::map<std::tuple<int, int, int>, int> seen;
  std::function<void(int, int, int)> walk = [&](int z, int s, int depth) {
    if (depth == 4) return;
    for (int a = 0; a < 3; ++a)
      for (int s2 = 0; s2 < n; ++s2) {
        if (mdp.prob(s, a, s2) == 0.0) continue;
        const int z2 = ais_step(gen, z, s2, a);
        auto it = seen.emplace(std::make_tuple(z, s2, a), z2);
        CHECK(it.first->second == z2);
        walk(z2, s2, depth + 1);
      }
  };
  for (int s = 0; s < n; ++s) walk(gen.init_feature(s), s, 0);
  CHECK(seen.size() > 20);
}

TEST_CASE("neural generator: zero parameters halve the feature and updates depend only on (z, s', a)") {
  const TabularEnv env = toy_env();
  Rng rng(1);
  NeuralAisGenerator gen(env, AisConfig{}, rng);
  const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
  const Eigen::VectorXd s2 = TabularEnv::state_of(2);
  const Eigen::VectorXd before = ais_step(gen, z, s2, Action::discrete(1));
  // Run unrelated histories in between; the step must not carry hidden state.
  Rng hr(2);
  for (const Episode& ep : rollouts(env, 5, 20, hr)) {
    Eigen::VectorXd h = gen.initial(ep.states[0]);
    for (std::size_t t = 0; t < ep.length(); ++t) h = gen.step(h, ep.states[t + 1], ep.actions[t]);
  }
  CHECK((ais_step(gen, z, s2, Action::discrete(1)) - before).norm() == 0.0);

  gen.compressor().set_zero();
  CHECK((ais_step(gen, z, s2, Action::discrete(1)) - 0.5 * z).norm() < 1e-15);
  CHECK(gen.initial(s2).norm() == 0.0);
}

TEST_CASE("perfect tabular generator has zero reward loss") {
  const TabularEnv env = toy_env(30);
  Rng rng(4);
  const auto batch = rollouts(env, 20, 30, rng);
  const TabularAisGenerator gen = identity_ais(env.mdp());
  CHECK(tabular_ais_loss(gen, batch, 1.0, AisLossKind::mmd) == 0.0);
  CHECK(tabular_ais_loss(gen, batch, 1.0, AisLossKind::kl) == 0.0);
  // A zero-probability observation is clipped rather than infinite.
  const TabularAisGenerator q = quantizer_ais(env.mdp(), {0, 0, 1, 1});
  CHECK(std::isfinite(tabular_ais_loss(q, batch, 0.0, AisLossKind::kl)));
}

TEST_CASE("mmd loss at m = s' equals minus the squared norm of s'") {
  PointMassEnv env(0.1, 0.0, 10);
  AisConfig cfg;
  cfg.lambda = 0.0;
  Rng rng(6);
  NeuralAisGenerator gen(env, cfg, rng);
  Episode ep;
  const double x = 0.7;
  for (int t = 0; t < 4; ++t) {
    ep.states.push_back(Eigen::VectorXd::Constant(1, x));
    ep.actions.push_back(Action::continuous(Eigen::VectorXd::Constant(1, 0.3 * t)));
    ep.rewards.push_back(0.0);
  }
  ep.states.push_back(Eigen::VectorXd::Constant(1, x));
  // Output layer: zero weight, bias = s'.
  nn::ParamList head = gen.transition_params();
  head[head.size() - 2]->value.setZero();
  head.back()->value.setConstant(x);
  nn::Tape tape;
  Rng noise(0);
  CHECK(ais_loss(tape, gen, {ep}, noise).total.item() == doctest::Approx(-x * x).epsilon(1e-14));
}

TEST_CASE("mmd loss gradient with respect to the predicted mean is 2m - 2s'") {
  PointMassEnv env(0.1, 0.0, 10);
  AisConfig cfg;
  cfg.lambda = 0.4;
  Rng rng(8);
  NeuralAisGenerator gen(env, cfg, rng);
  Rng er(9);
  const Episode ep = rollouts(env, 1, 6, er).front();
  nn::zero_grads(gen.params());
  nn::Tape tape;
  Rng noise(0);
  tape.backward(ais_loss(tape, gen, {ep}, noise).total);
  // The output bias enters m additively, so its gradient is the mean of
  // (1 - lambda)(2m - 2s') over steps.
  double expected = 0.0;
  Eigen::VectorXd z = gen.initial(ep.states[0]);
  for (std::size_t t = 0; t < ep.length(); ++t) {
    Eigen::VectorXd in(z.size() + 1);
    in << z, gen.encode_action(ep.actions[t]);
    const double m = gen.gaussian_head().net().value(in)(0);
    expected += (1.0 - cfg.lambda) * (2.0 * m - 2.0 * ep.states[t + 1](0)) / static_cast<double>(ep.length());
    z = gen.step(z, ep.states[t + 1], ep.actions[t]);
  }
  CHECK(gen.transition_params().back()->grad(0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lambda = 1 leaves the transition head without gradient") {
  const TabularEnv env = toy_env(10);
  for (AisLossKind kind : {AisLossKind::mmd, AisLossKind::kl}) {
    AisConfig cfg;
    cfg.lambda = 1.0;
    cfg.loss = kind;
    Rng rng(12);
    NeuralAisGenerator gen(env, cfg, rng);
    Rng er(13);
    const auto batch = rollouts(env, 3, 10, er);
    nn::zero_grads(gen.params());
    nn::Tape tape;
    Rng noise(0);
    tape.backward(ais_loss(tape, gen, batch, noise).total);
    for (auto* p : gen.transition_params()) CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
    double compressor = 0.0;
    for (auto* p : gen.compressor_params()) compressor += p->grad.cwiseAbs().sum();
    CHECK(compressor > 0.0);
  }
}

TEST_CASE("ais_loss gradients match finite differences on a 3-step batch") {
  struct Variant {
    bool tabular;
    AisLossKind loss;
    MmdKernel kernel;
    double param;
  };
  const std::vector<Variant> variants{{true, AisLossKind::mmd, MmdKernel::mean, 1.0},
                                      {true, AisLossKind::kl, MmdKernel::mean, 1.0},
                                      {false, AisLossKind::kl, MmdKernel::mean, 1.0},
                                      {false, AisLossKind::mmd, MmdKernel::mean, 1.0},
                                      {false, AisLossKind::mmd, MmdKernel::energy, 1.5},
                                      {false, AisLossKind::mmd, MmdKernel::gaussian, 0.8},
                                      {false, AisLossKind::mmd, MmdKernel::laplace, 0.8}};
  // Small K keeps the loss O(1) so central differences stay accurate.
  const TabularEnv toy(toy_mdp(2.0), {0, 1}, 3, "toy");
  PointMassEnv pm(0.2, 0.5, 3);
  for (const Variant& v : variants) {
    CAPTURE(to_string(v.loss));
    CAPTURE(to_string(v.kernel));
    const Environment& env = v.tabular ? static_cast<const Environment&>(toy) : pm;
    AisConfig cfg;
    cfg.loss = v.loss;
    cfg.kernel = v.kernel;
    cfg.kernel_param = v.param;
    cfg.feature_dim = 4;
    cfg.hidden = {5};
    cfg.kernel_samples = 3;
    Rng rng(21);
    NeuralAisGenerator gen(env, cfg, rng);
    Rng er(22);
    const auto batch = rollouts(env, 2, 3, er);
    const double err = oracle::fd_max_rel_error(gen.params(), [&](nn::Tape& tape) {
      Rng noise(5);
      return ais_loss(tape, gen, batch, noise).total;
    });
    CHECK(err < 1e-5);
  }
}

TEST_CASE("ais config validation") {
  const TabularEnv env = toy_env();
  Rng rng(0);
  AisConfig bad;
  bad.lambda = 1.5;
  CHECK_THROWS_AS(NeuralAisGenerator(env, bad, rng), InputError);
  AisConfig tv;
  tv.loss = AisLossKind::tv;
  CHECK_THROWS_AS(NeuralAisGenerator(env, tv, rng), InputError);
  AisConfig energy;
  energy.kernel = MmdKernel::energy;
  energy.kernel_param = 2.5;
  CHECK_THROWS_AS(energy.validate(), InputError);
}

TEST_CASE("empirical constants: exact model, nested rollouts and concentration") {
  const TabularEnv env = toy_env(50);
  const TabularAisGenerator exact = identity_ais(env.mdp());
  const TabularAisModel model(exact, env);

  double prev = -1.0;
  for (int n : {1, 2, 4, 8, 16}) {
    Rng rng(99);
    const EmpiricalEpsDelta e = measure_eps_delta_empirical(env, model, n, rng);
    CHECK(e.eps_hat == 0.0);
    CHECK(e.n_samples == static_cast<std::size_t>(50 * n));
    prev = e.eps_hat;
  }
  CHECK(prev == 0.0);

  Rng rng(7);
  const EmpiricalEpsDelta big = measure_eps_delta_empirical(env, model, 200, rng);
  CHECK(big.n_samples == 10000);
  CHECK(big.delta_hat < 0.05);
  CHECK(big.bins_used > 0);

  // An aliased model is detectably wrong.
  const TabularAisGenerator coarse = quantizer_ais(env.mdp(), {0, 0, 1, 1});
  const TabularAisModel wrong(coarse, env);
  Rng rng2(7);
  const EmpiricalEpsDelta bad = measure_eps_delta_empirical(env, wrong, 200, rng2);
  CHECK(bad.delta_hat > 0.1);
  CHECK(bad.eps_hat > 0.0);
}

TEST_CASE("empirical eps_hat is nondecreasing in the number of rollouts") {
  const TabularEnv env = toy_env(20);
  Rng init(3);
  AisConfig cfg;
  NeuralAisGenerator gen(env, cfg, init);
  double prev = 0.0;
  for (int n = 1; n <= 64; n *= 2) {
    Rng rng(123);
    const double e = measure_eps_delta_empirical(env, gen, n, rng).eps_hat;
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(prev > 0.0);
}
