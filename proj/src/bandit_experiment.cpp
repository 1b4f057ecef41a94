#include "gmc/bandit_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmc/errors.hpp"
#include "gmc/loss.hpp"
#include "gmc/random.hpp"

namespace gmc {

namespace {

enum Stream : std::uint64_t {
  kClassifierInit = 1,
  kActorInit = 2,
  kActorSampling = 3,
  kEvalPick = 4,
};

}  // namespace

void BanditConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw std::invalid_argument("epochs and batch_size must be >= 1");
  if (actor.num_actions != num_actions(action_space_for(condition))) {
    throw std::invalid_argument("actor output size does not match the condition's action space");
  }
  actor.validate();
  gmc.validate();
  if (loss_window == 0) throw std::invalid_argument("loss_window must be >= 1");
  if (eval_per_class == 0) throw std::invalid_argument("eval_per_class must be >= 1");
}

std::size_t BanditConfig::batches_for(std::size_t dataset_size) const {
  if (batches_per_epoch > 0) return batches_per_epoch;
  return std::max<std::size_t>(1, dataset_size / batch_size);
}

EvalSet make_eval_set(const BanditEnv& env, std::size_t per_class, std::uint64_t seed) {
  const LabeledSet& data = env.data();
  Rng rng = make_rng(seed, kEvalPick);
  auto by_class = data.index_by_class();
  std::vector<std::size_t> picked;
  for (auto& idx : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t k = std::min(per_class, idx.size());
    picked.insert(picked.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  }
  EvalSet eval;
  eval.images = Tensor::zeros({picked.size(), data.input_dim()});
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const auto src = data.images.row(picked[i]);
    std::copy(src.begin(), src.end(), eval.images.row(i).begin());
    eval.targets.push_back(env.target_labels(picked[i]));
    eval.groups.push_back(GroupScheme::group_of(data.labels[picked[i]]));
  }
  return eval;
}

RunMetrics run_bandit(const BanditConfig& config, const LabeledSet& data, std::uint64_t seed,
                      const EpochCallback& on_epoch) {
  config.validate();
  BanditEnv env(data, config.condition, seed);
  const EvalSet eval = make_eval_set(env, config.eval_per_class, seed);

  Rng classifier_init = make_rng(seed, kClassifierInit);
  Mlp classifier(MlpSpec{data.input_dim(), config.classifier_hidden, kNumClasses, Activation::kReLU},
                 classifier_init);
  Adam classifier_opt(classifier.num_params(), config.classifier_adam);
  GmcState gmc_state(classifier.num_params(), config.gmc);

  Rng actor_init = make_rng(seed, kActorInit);
  SelectionActor actor(config.actor, actor_init);
  Rng actor_rng = make_rng(seed, kActorSampling);

  LossWindow window(GroupScheme::kNumGroups, config.loss_window);
  const std::size_t batches = config.batches_for(data.size());
  const std::size_t B = config.batch_size;

  RunMetrics metrics;
  metrics.method = std::string(to_string(config.method));
  metrics.seed = seed;

  Tensor x = Tensor::zeros({B, data.input_dim()});
  std::vector<int> labels(B);
  std::vector<int> groups(B);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> visits(GroupScheme::kNumGroups, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
      ActionBatch decisions = actor.act_batch(B, actor_rng);
      for (std::size_t i = 0; i < B; ++i) {
        const EpisodeOutcome ep = env.step(decisions.actions[i]);
        const auto src = data.images.row(ep.sample);
        std::copy(src.begin(), src.end(), x.row(i).begin());
        labels[i] = ep.label;
        groups[i] = ep.group;
        visits[static_cast<std::size_t>(ep.group)] += 1.0;
      }

      const Tensor& logits = classifier.forward(x);
      LossOutput loss = softmax_cross_entropy(logits, labels, Reduction::kSum);
      if (!std::isfinite(loss.value)) throw NumericalError("classifier loss is not finite");
      classifier.backward(loss.grad);

      // Signals see the momentum of past batches only.
      const std::vector<double> rewards =
          batch_signal(config.method, classifier, gmc_state, SignalBatch{loss.per_sample, groups},
                       window, config.scales, config.normalize_dim);

      classifier.params().scale_grads(1.0 / static_cast<double>(B));
      if (config.second_moment == SecondMomentSource::kPerSample) {
        std::vector<double> sq = classifier.per_sample_sq_grad_sum();
        for (double& q : sq) q /= static_cast<double>(B);
        gmc_state.update(classifier.params().grads(), sq);
      } else {
        gmc_state.update(classifier.params().grads());
      }
      classifier_opt.step(classifier.params());

      actor.update(decisions, rewards);
    }
    metrics.test_loss.push_back(group_test_loss(classifier, eval, GroupScheme::kNumGroups));
    metrics.visits.push_back(std::move(visits));
    if (on_epoch) on_epoch(epoch, metrics);
  }
  return metrics;
}

}  // namespace gmc
