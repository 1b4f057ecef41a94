#include <cmath>
#include <vector>

#include "doctest.h"
#include "gmc/errors.hpp"
#include "gmc/loss.hpp"
#include "gmc/random.hpp"
#include "gmc/rl_agents.hpp"
#include "oracles.hpp"

namespace gmc {
namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::vector<double> data(rows * cols);
  for (double& x : data) x = standard_normal(rng);
  return Tensor::matrix(rows, cols, std::move(data));
}

std::vector<int> random_actions(std::size_t n, Rng& rng) {
  std::vector<int> a(n);
  for (int& x : a) x = uniform_int(rng, 0, kNumGridActions);
  return a;
}

}  // namespace

TEST_CASE("agent names") {
  for (AgentKind k : {AgentKind::kPpo, AgentKind::kIcm, AgentKind::kGmc, AgentKind::kIcmGmc}) {
    CHECK(parse_agent_kind(to_string(k)) == k);
  }
  CHECK_THROWS(parse_agent_kind("dqn"));
}

TEST_CASE("GAE matches the brute-force sum on random trajectories") {
  Rng rng = make_rng(41, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 80));
    std::vector<double> r(n), v(n);
    std::vector<bool> done(n);
    for (std::size_t t = 0; t < n; ++t) {
      r[t] = standard_normal(rng);
      v[t] = standard_normal(rng);
      done[t] = uniform01(rng) < 0.1;
    }
    const double last = standard_normal(rng);
    const double gamma = 0.9 + 0.1 * uniform01(rng);
    const double lambda = uniform01(rng);
    Advantages a = gae_advantages(r, v, done, last, gamma, lambda);
    auto ref = oracle::gae_bruteforce(r, v, done, last, gamma, lambda);
    for (std::size_t t = 0; t < n; ++t) {
      CHECK(std::abs(a.advantages[t] - ref[t]) < 1e-10);
      CHECK(a.returns[t] == doctest::Approx(a.advantages[t] + v[t]).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(gae_advantages(std::vector<double>{1.0}, std::vector<double>{}, {false}, 0, 0.9, 0.9),
                  DimensionError);
}

TEST_CASE("GAE limiting cases") {
  std::vector<double> r = {1.0, 2.0, 3.0};
  std::vector<double> v = {0.5, -0.5, 0.25};
  // lambda = 0 gives the one-step TD error.
  Advantages td = gae_advantages(r, v, {false, true, false}, 4.0, 0.9, 0.0);
  CHECK(td.advantages[0] == doctest::Approx(1.0 + 0.9 * -0.5 - 0.5));
  CHECK(td.advantages[1] == doctest::Approx(2.0 - -0.5));
  CHECK(td.advantages[2] == doctest::Approx(3.0 + 0.9 * 4.0 - 0.25));
  // gamma = lambda = 1 without terminals gives Monte Carlo returns.
  Advantages mc = gae_advantages(r, v, {false, false, false}, 4.0, 1.0, 1.0);
  CHECK(mc.returns[0] == doctest::Approx(10.0));
  CHECK(mc.returns[2] == doctest::Approx(7.0));
}

TEST_CASE("clipped surrogate value and gradient") {
  Rng rng = make_rng(42, 0);
  const std::size_t n = 12;
  Tensor logits = random_matrix(n, kNumGridActions, rng);
  auto actions = random_actions(n, rng);
  std::vector<double> adv(n), old_lp(n);
  for (std::size_t i = 0; i < n; ++i) {
    adv[i] = standard_normal(rng);
    const auto ls = log_softmax(logits.row(i));
    // Spread ratios across both clip boundaries.
    old_lp[i] = ls[static_cast<std::size_t>(actions[i])] + 0.4 * standard_normal(rng);
  }
  Tensor grad;
  double ent = 0.0;
  std::vector<double> ratios;
  const double loss = ppo_policy_loss(logits, actions, old_lp, adv, 0.2, 0.01, &grad, &ent, &ratios);

  double ref = 0.0, h_ref = 0.0;
  bool near_kink = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ls = log_softmax(logits.row(i));
    const double r = std::exp(ls[static_cast<std::size_t>(actions[i])] - old_lp[i]);
    CHECK(ratios[i] == doctest::Approx(r).epsilon(1e-14));
    ref -= std::min(r * adv[i], std::clamp(r, 0.8, 1.2) * adv[i]) / n;
    h_ref += entropy(softmax(logits.row(i))) / n;
    near_kink |= std::abs(r - 0.8) < 1e-3 || std::abs(r - 1.2) < 1e-3;
  }
  CHECK(loss == doctest::Approx(ref - 0.01 * h_ref).epsilon(1e-13));
  CHECK(ent == doctest::Approx(h_ref).epsilon(1e-13));
  REQUIRE_FALSE(near_kink);

  auto f = [&] { return ppo_policy_loss(logits, actions, old_lp, adv, 0.2, 0.01, nullptr); };
  auto numeric = oracle::central_difference(f, logits.data(), 1e-6);
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    CHECK(oracle::relative_error(grad.data()[i], numeric[i]) < 1e-5);
  }
  CHECK_THROWS_AS(ppo_policy_loss(logits, std::vector<int>{0}, old_lp, adv, 0.2, 0.0, nullptr),
                  DimensionError);
}

TEST_CASE("surrogate at the behaviour policy has unit ratios") {
  Rng rng = make_rng(43, 0);
  Tensor logits = random_matrix(5, kNumGridActions, rng);
  auto actions = random_actions(5, rng);
  std::vector<double> old_lp(5), adv = {1, -2, 0.5, 3, -1};
  for (std::size_t i = 0; i < 5; ++i) old_lp[i] = log_softmax(logits.row(i))[static_cast<std::size_t>(actions[i])];
  std::vector<double> ratios;
  const double loss = ppo_policy_loss(logits, actions, old_lp, adv, 0.2, 0.0, nullptr, nullptr, &ratios);
  for (double r : ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(loss == doctest::Approx(-0.3));
}

TEST_CASE("PPO update: unit first ratios and clipped gradient norms") {
  PpoConfig cfg;
  cfg.minibatch = 32;
  cfg.policy_lr = 1e-2;  // large steps so clipping is exercised
  cfg.value_lr = 1e-2;
  Rng init = make_rng(44, 0);
  Rng act_rng = make_rng(44, 1);
  Rng shuffle = make_rng(44, 2);
  ActorCritic ac(6, cfg, init);
  Trajectory traj;
  const std::size_t n = 128;
  traj.obs = random_matrix(n, 6, act_rng);
  for (std::size_t i = 0; i < n; ++i) {
    auto [a, lp] = ac.act(traj.obs.row(i), act_rng);
    traj.actions.push_back(a);
    traj.log_probs.push_back(lp);
    traj.ext_rewards.push_back(a == 2 ? 10.0 : -5.0);
    traj.dones.push_back(true);
  }
  traj.values = ac.values(traj.obs);
  Advantages adv = gae_advantages(traj.ext_rewards, traj.values, traj.dones, 0.0, cfg.gamma, cfg.gae_lambda);
  PpoDiagnostics d = ac.update(traj, adv, cfg, shuffle);
  CHECK(d.first_ratio_max_dev < 1e-12);
  CHECK(d.max_clipped_grad_norm <= cfg.max_grad_norm * (1 + 1e-12));
  CHECK(d.max_policy_grad_norm > cfg.max_grad_norm);
  CHECK(d.clip_fraction > 0.0);
  CHECK(std::isfinite(d.approx_kl));
}

TEST_CASE("PPO learns a two-state contextual bandit") {
  PpoConfig cfg;
  cfg.minibatch = 64;
  cfg.hidden = {16};
  cfg.entropy_coef = 0.0;
  cfg.policy_lr = 1e-3;
  Rng init = make_rng(45, 0);
  Rng act_rng = make_rng(45, 1);
  Rng shuffle = make_rng(45, 2);
  ActorCritic ac(2, cfg, init);
  // State (1, 0) wants action 3, state (0, 1) wants action 5. One-step episodes.
  auto best = [](std::size_t s) { return s == 0 ? 3 : 5; };
  auto success_rate = [&] {
    int hits = 0;
    for (int i = 0; i < 400; ++i) {
      const std::size_t s = static_cast<std::size_t>(i % 2);
      std::vector<double> obs = {s == 0 ? 1.0 : 0.0, s == 1 ? 1.0 : 0.0};
      hits += ac.act(obs, act_rng).first == best(s);
    }
    return hits / 400.0;
  };
  const double before = success_rate();
  for (int it = 0; it < 60; ++it) {
    Trajectory traj;
    std::vector<double> rows;
    for (std::size_t i = 0; i < 256; ++i) {
      const std::size_t s = i % 2;
      std::vector<double> obs = {s == 0 ? 1.0 : 0.0, s == 1 ? 1.0 : 0.0};
      auto [a, lp] = ac.act(obs, act_rng);
      rows.insert(rows.end(), obs.begin(), obs.end());
      traj.actions.push_back(a);
      traj.log_probs.push_back(lp);
      traj.ext_rewards.push_back(a == best(s) ? 1.0 : 0.0);
      traj.dones.push_back(true);
    }
    traj.obs = Tensor::matrix(256, 2, rows);
    traj.values = ac.values(traj.obs);
    Advantages adv = gae_advantages(traj.ext_rewards, traj.values, traj.dones, 0.0, 0.99, 0.95);
    ac.update(traj, adv, cfg, shuffle);
  }
  CHECK(before < 0.3);
  CHECK(success_rate() > 0.9);
}

TEST_CASE("one-hot concatenation") {
  Tensor x = Tensor::matrix(2, 2, {1, 2, 3, 4});
  Tensor y = concat_one_hot(x, std::vector<int>{2, 0}, 3);
  CHECK(y.cols() == 5);
  CHECK(std::vector<double>(y.row(0).begin(), y.row(0).end()) == std::vector<double>{1, 2, 0, 0, 1});
  CHECK(std::vector<double>(y.row(1).begin(), y.row(1).end()) == std::vector<double>{3, 4, 1, 0, 0});
  CHECK_THROWS_AS(concat_one_hot(x, std::vector<int>{3, 0}, 3), RangeError);
}

TEST_CASE("GMC dynamics reward equals the scalar GMC of explicit per-sample gradients") {
  Rng rng = make_rng(46, 0);
  GmcRlConfig cfg;
  cfg.hidden = {16};
  cfg.minibatch = 16;
  cfg.dynamics_lr = 1e-2;
  const std::size_t obs_dim = 5;
  GmcDynamics dyn(obs_dim, kNumGridActions, cfg, rng, make_rng(46, 1));
  Tensor s = random_matrix(48, obs_dim, rng);
  Tensor s2 = random_matrix(48, obs_dim, rng);
  auto a = random_actions(48, rng);
  // Before any training m is zero and so is every reward.
  for (double r : dyn.rewards(s, a, s2)) CHECK(r == 0.0);
  for (int i = 0; i < 3; ++i) dyn.train(s, a, s2);
  CHECK(dyn.state().step_count() == 9);

  auto r = dyn.rewards(s, a, s2);
  Tensor x = concat_one_hot(s, a, kNumGridActions);
  const LossOutput l = mse_loss(dyn.model().predict(x), s2, Reduction::kSum);
  auto g = per_sample_gradients(dyn.model(), x, l.grad);
  const auto& st = dyn.state();
  for (std::size_t i = 0; i < 48; ++i) {
    const double ref = cfg.intrinsic_coef * oracle::gmc_scalar(g[i], st.m(), st.v(), 1e-8);
    CHECK(r[i] == doctest::Approx(ref).epsilon(1e-12));
  }
  // m^2 <= v after training on the per-sample second moment.
  for (std::size_t p = 0; p < st.dim(); ++p) CHECK(st.m()[p] * st.m()[p] <= st.v()[p]);
}

TEST_CASE("ICM rewards: prediction error and forward-model GMC") {
  Rng rng = make_rng(47, 0);
  IcmConfig cfg;
  cfg.feature_dim = 8;
  cfg.hidden = {16};
  cfg.minibatch = 16;
  const std::size_t obs_dim = 6;
  Tensor s = random_matrix(32, obs_dim, rng);
  Tensor s2 = random_matrix(32, obs_dim, rng);
  auto a = random_actions(32, rng);

  Rng init_a = make_rng(48, 0);
  Icm icm(obs_dim, kNumGridActions, cfg, init_a, make_rng(48, 1));
  auto err = icm.forward_errors(s, a, s2);
  auto r = icm.rewards(s, a, s2);
  Tensor phi = icm.encoder().predict(s);
  Tensor phi2 = icm.encoder().predict(s2);
  Tensor pred = icm.forward_model().predict(concat_one_hot(phi, a, kNumGridActions));
  for (std::size_t i = 0; i < 32; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < cfg.feature_dim; ++j) e += 0.5 * std::pow(pred(i, j) - phi2(i, j), 2);
    CHECK(err[i] == doctest::Approx(e).epsilon(1e-13));
    CHECK(r[i] == doctest::Approx(cfg.intrinsic_coef * e).epsilon(1e-13));
  }
  // Training lowers the combined loss on a fixed batch.
  const double first = icm.step(s, a, s2).total;
  double last = first;
  for (int i = 0; i < 200; ++i) last = icm.step(s, a, s2).total;
  CHECK(last < first);
  CHECK(icm.forward_gmc() == nullptr);

  Rng init_b = make_rng(48, 0);
  Icm icm_gmc(obs_dim, kNumGridActions, cfg, init_b, make_rng(48, 1), true, {0.99, 0.99, 1e-8, false},
              0.5);
  for (int i = 0; i < 3; ++i) icm_gmc.train(s, a, s2);
  REQUIRE(icm_gmc.forward_gmc() != nullptr);
  auto rg = icm_gmc.rewards(s, a, s2);
  Tensor x = concat_one_hot(icm_gmc.encoder().predict(s), a, kNumGridActions);
  LossOutput fl = mse_loss(icm_gmc.forward_model().predict(x), icm_gmc.encoder().predict(s2),
                           Reduction::kSum);
  for (double& v : fl.grad.data()) v *= cfg.forward_weight;
  auto g = per_sample_gradients(icm_gmc.forward_model(), x, fl.grad);
  const GmcState& st = *icm_gmc.forward_gmc();
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(rg[i] == doctest::Approx(0.5 * oracle::gmc_scalar(g[i], st.m(), st.v(), 1e-8)).epsilon(1e-12));
  }
}

TEST_CASE("short runs are deterministic and honour early stopping") {
  RlConfig cfg;
  cfg.env.size = 5;
  cfg.ppo.rollout = 256;
  cfg.ppo.minibatch = 64;
  cfg.ppo.total_steps = 1024;
  cfg.record_actions = true;
  for (AgentKind k : {AgentKind::kPpo, AgentKind::kIcm, AgentKind::kGmc, AgentKind::kIcmGmc}) {
    CAPTURE(to_string(k));
    cfg.agent = k;
    RlRunResult a = run_rl(cfg, 3);
    RlRunResult b = run_rl(cfg, 3);
    CHECK(a.rollouts.size() == 4);
    CHECK(a.actions.size() == 1024);
    CHECK(a.actions == b.actions);
    CHECK(a.final_policy_params == b.final_policy_params);
    for (const auto& m : a.rollouts) CHECK(std::isfinite(m.mean_intrinsic));
  }
  cfg.agent = AgentKind::kPpo;
  std::size_t calls = 0;
  run_rl(cfg, 0, [&](const RolloutMetrics&) { ++calls; });
  CHECK(calls == 4);

  RlConfig bad = cfg;
  bad.reward_window = 0;
  CHECK_THROWS(run_rl(bad, 0));
}

}  // namespace gmc
