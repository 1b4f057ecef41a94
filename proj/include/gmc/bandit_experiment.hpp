#ifndef GMC_BANDIT_EXPERIMENT_HPP_
#define GMC_BANDIT_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "gmc/adam.hpp"
#include "gmc/analysis.hpp"
#include "gmc/bandit_env.hpp"
#include "gmc/datasets.hpp"
#include "gmc/gmc_stats.hpp"
#include "gmc/selection_policy.hpp"
#include "gmc/signals.hpp"

namespace gmc {

// Where v gets its squared gradients from. kPerSample averages g_i^2 over the
// batch, which keeps v on the scale of the per-sample gradients the reward is
// computed from. kBatchMean squares the batch-mean gradient.
enum class SecondMomentSource { kPerSample, kBatchMean };

// One controlled task-selection run. Defaults follow the reference controlled
// experiment settings; batches_per_epoch == 0 means one pass over the dataset.
struct BanditConfig {
  BanditMode condition = BanditMode::kNoise;
  SignalKind method = SignalKind::kGmc;
  std::size_t epochs = 100;
  std::size_t batches_per_epoch = 0;
  std::size_t batch_size = 256;
  std::vector<std::size_t> classifier_hidden = {256, 256};
  AdamConfig classifier_adam{1e-3, 0.9, 0.999, 1e-8};
  ActorConfig actor;
  GmcConfig gmc{0.999, 0.999, 1e-8, false};
  SecondMomentSource second_moment = SecondMomentSource::kPerSample;
  std::size_t loss_window = 50;
  SignalScales scales;
  bool normalize_dim = true;
  std::size_t eval_per_class = 50;

  void validate() const;
  std::size_t batches_for(std::size_t dataset_size) const;
};

using EpochCallback = std::function<void(std::size_t epoch, const RunMetrics& metrics)>;

// Runs the select -> observe -> train -> reward -> policy-update loop.
RunMetrics run_bandit(const BanditConfig& config, const LabeledSet& data, std::uint64_t seed,
                      const EpochCallback& on_epoch = {});

// Balanced evaluation set: eval_per_class samples of every class, labelled
// with the targets the environment would serve.
EvalSet make_eval_set(const BanditEnv& env, std::size_t per_class, std::uint64_t seed);

}  // namespace gmc

#endif  // GMC_BANDIT_EXPERIMENT_HPP_
