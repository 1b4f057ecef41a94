#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "gmc/analysis.hpp"
#include "gmc/bandit_experiment.hpp"
#include "gmc/loss.hpp"

namespace gmc {
namespace {

BanditConfig tiny_config(SignalKind method, BanditMode mode = BanditMode::kNoise) {
  BanditConfig c;
  c.condition = mode;
  c.method = method;
  c.epochs = 3;
  c.batches_per_epoch = 4;
  c.batch_size = 32;
  c.classifier_hidden = {16};
  c.actor.hidden_dims = {16};
  c.actor.num_actions = num_actions(action_space_for(mode));
  c.eval_per_class = 5;
  c.loss_window = 4;
  return c;
}

LabeledSet tiny_data() {
  SyntheticSpec s;
  s.input_dim = 8;
  s.samples_per_class = 20;
  return generate_synthetic(s);
}

}  // namespace

TEST_CASE("every signal runs and produces well-formed metrics") {
  LabeledSet data = tiny_data();
  for (SignalKind k : all_signal_kinds()) {
    CAPTURE(to_string(k));
    RunMetrics m = run_bandit(tiny_config(k), data, 1);
    REQUIRE(m.epochs() == 3);
    for (std::size_t e = 0; e < 3; ++e) {
      REQUIRE(m.test_loss[e].size() == 4);
      const double visits = std::accumulate(m.visits[e].begin(), m.visits[e].end(), 0.0);
      CHECK(visits == 4 * 32);
      for (double l : m.test_loss[e]) CHECK(std::isfinite(l));
    }
  }
}

TEST_CASE("runs are deterministic per seed and differ across seeds") {
  LabeledSet data = tiny_data();
  BanditConfig c = tiny_config(SignalKind::kGmc);
  RunMetrics a = run_bandit(c, data, 4);
  RunMetrics b = run_bandit(c, data, 4);
  RunMetrics other = run_bandit(c, data, 5);
  CHECK(a.test_loss == b.test_loss);
  CHECK(a.visits == b.visits);
  CHECK_FALSE(a.test_loss == other.test_loss);
}

TEST_CASE("second-moment source changes rewards but keeps the loop valid") {
  LabeledSet data = tiny_data();
  BanditConfig c = tiny_config(SignalKind::kGmc);
  c.second_moment = SecondMomentSource::kBatchMean;
  RunMetrics m = run_bandit(c, data, 2);
  CHECK(m.epochs() == 3);
}

TEST_CASE("curriculum runs use the per-class action space") {
  LabeledSet data = tiny_data();
  BanditConfig c = tiny_config(SignalKind::kCuriosity, BanditMode::kCurriculum);
  RunMetrics m = run_bandit(c, data, 0);
  CHECK(m.visits[0].size() == 4);
  BanditConfig wrong = c;
  wrong.actor.num_actions = 4;
  CHECK_THROWS(run_bandit(wrong, data, 0));
}

TEST_CASE("epoch callback sees every epoch") {
  LabeledSet data = tiny_data();
  std::vector<std::size_t> seen;
  run_bandit(tiny_config(SignalKind::kUniform), data, 0,
             [&](std::size_t e, const RunMetrics& m) {
               seen.push_back(e);
               CHECK(m.epochs() == e + 1);
             });
  CHECK(seen == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("evaluation set is balanced and targets follow the environment") {
  LabeledSet data = tiny_data();
  BanditEnv noise(data, BanditMode::kNoise, 3);
  EvalSet e = make_eval_set(noise, 5, 3);
  CHECK(e.images.rows() == 50);
  std::vector<int> per_group(4, 0);
  for (std::size_t i = 0; i < e.groups.size(); ++i) {
    ++per_group[static_cast<std::size_t>(e.groups[i])];
    CHECK(e.targets[i].size() == GroupScheme::group_size(e.groups[i]));
  }
  CHECK(per_group == std::vector<int>{5, 10, 15, 20});

  // group_test_loss against a loop over the expected cross-entropy.
  Rng rng = make_rng(0, 0);
  Mlp net({8, {4}, 10}, rng);
  auto g = group_test_loss(net, e, 4);
  Tensor logits = net.predict(e.images);
  std::vector<double> sum(4, 0.0);
  for (std::size_t i = 0; i < e.groups.size(); ++i) {
    sum[static_cast<std::size_t>(e.groups[i])] += expected_cross_entropy(logits.row(i), e.targets[i]);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(g[k] == doctest::Approx(sum[k] / per_group[k]).epsilon(1e-13));
  }

  BanditEnv cur(data, BanditMode::kCurriculum, 3);
  EvalSet c = make_eval_set(cur, 2, 3);
  for (const auto& t : c.targets) CHECK(t.size() == 1);
}

}  // namespace gmc
