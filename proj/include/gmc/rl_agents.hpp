#ifndef GMC_RL_AGENTS_HPP_
#define GMC_RL_AGENTS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmc/adam.hpp"
#include "gmc/gmc_stats.hpp"
#include "gmc/gridworld.hpp"
#include "gmc/mlp.hpp"
#include "gmc/random.hpp"
#include "gmc/tensor.hpp"

namespace gmc {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  std::size_t epochs = 4;
  std::size_t minibatch = 256;
  std::size_t rollout = 2048;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  double reward_scaling = 10.0;
  std::size_t total_steps = 500'000;
  std::vector<std::size_t> hidden = {64, 64};
  bool normalize_advantages = true;

  void validate() const;
};

struct IcmConfig {
  std::size_t feature_dim = 64;
  double lr = 1e-4;
  double intrinsic_coef = 0.02;
  double forward_weight = 0.2;
  double inverse_weight = 0.8;
  std::vector<std::size_t> hidden = {128};
  std::size_t minibatch = 256;

  void validate() const;
};

struct GmcRlConfig {
  double beta0 = 0.990;
  double beta1 = 0.990;
  double intrinsic_coef = 0.02;
  double dynamics_lr = 1e-4;
  std::vector<std::size_t> hidden = {128};
  std::size_t minibatch = 256;

  void validate() const;
  GmcConfig stats() const { return GmcConfig{beta0, beta1, 1e-8, false}; }
};

enum class AgentKind { kPpo, kIcm, kGmc, kIcmGmc };

std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view name);

// One rollout. obs and next_obs hold normalized observations, one row per step.
// dones[t] marks that the episode ended after step t (goal or time limit).
struct Trajectory {
  Tensor obs;
  Tensor next_obs;
  std::vector<int> actions;
  std::vector<double> ext_rewards;
  std::vector<double> int_rewards;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<bool> dones;
  double last_value = 0.0;  // V(s_T) for bootstrapping an unfinished tail

  std::size_t size() const { return actions.size(); }
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}
// V_T is last_value; returns are A_t + V_t.
Advantages gae_advantages(std::span<const double> rewards, std::span<const double> values,
                          const std::vector<bool>& dones, double last_value, double gamma,
                          double lambda);

struct PpoDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double first_ratio_max_dev = 0.0;  // max |ratio - 1| over the first minibatch
  double max_policy_grad_norm = 0.0;
  double max_value_grad_norm = 0.0;
  double max_clipped_grad_norm = 0.0;
};

// Policy and value networks with separate Adam optimizers.
class ActorCritic {
 public:
  ActorCritic(std::size_t obs_dim, const PpoConfig& config, Rng& init_rng);

  Mlp& policy() { return policy_; }
  Mlp& value() { return value_; }
  const Mlp& policy() const { return policy_; }

  // Samples an action for a single observation; returns (action, log_prob).
  std::pair<int, double> act(std::span<const double> obs, Rng& rng) const;
  std::vector<double> values(const Tensor& obs) const;

  // cfg.epochs passes of shuffled minibatches of the clipped surrogate plus
  // entropy bonus and the squared-error value loss.
  PpoDiagnostics update(const Trajectory& traj, const Advantages& adv, const PpoConfig& cfg,
                        Rng& shuffle_rng);

 private:
  Mlp policy_;
  Mlp value_;
  Adam policy_opt_;
  Adam value_opt_;
};

// Clipped surrogate plus entropy bonus for one minibatch. Writes d loss / d logits
// into grad (same shape as logits). Returns the loss value.
double ppo_policy_loss(const Tensor& logits, std::span<const int> actions,
                       std::span<const double> old_log_probs, std::span<const double> advantages,
                       double clip, double entropy_coef, Tensor* grad, double* mean_entropy = nullptr,
                       std::vector<double>* ratios = nullptr);

// Intrinsic reward source. rewards() scores a full rollout with the current
// models; train() then makes one shuffled minibatch pass over it.
class IntrinsicModule {
 public:
  virtual ~IntrinsicModule() = default;
  virtual std::vector<double> rewards(const Tensor& obs, std::span<const int> actions,
                                      const Tensor& next_obs) = 0;
  // Returns the mean training loss.
  virtual double train(const Tensor& obs, std::span<const int> actions, const Tensor& next_obs) = 0;
};

// Rows [x | one_hot(a)].
Tensor concat_one_hot(const Tensor& x, std::span<const int> actions, std::size_t num_actions);

// Per-sample GMC over all of `model`'s parameters: model must have just run
// backward() with per-sample upstream gradients. Scaled by 1/sqrt(d).
std::vector<double> per_sample_gmc(const Mlp& model, const GmcState& state);

struct IcmLosses {
  double forward = 0.0;
  double inverse = 0.0;
  double total = 0.0;
};

// Encoder phi: obs -> features, inverse model [phi(s), phi(s')] -> action logits,
// forward model [phi(s), one_hot(a)] -> predicted phi(s').
class Icm : public IntrinsicModule {
 public:
  // With track_forward_gmc, a GmcState follows the forward model's gradients and
  // rewards() returns GMC over those parameters instead of prediction error.
  Icm(std::size_t obs_dim, std::size_t num_actions, IcmConfig config, Rng& init_rng, Rng shuffle_rng,
      bool track_forward_gmc = false, GmcConfig gmc_config = {0.99, 0.99, 1e-8, false},
      double gmc_coef = 0.02);

  std::vector<double> rewards(const Tensor& obs, std::span<const int> actions,
                              const Tensor& next_obs) override;
  double train(const Tensor& obs, std::span<const int> actions, const Tensor& next_obs) override;

  // One gradient step on a minibatch; returns the loss parts.
  IcmLosses step(const Tensor& obs, std::span<const int> actions, const Tensor& next_obs);
  // 0.5 * ||phi(s') - f(phi(s), a)||^2 per sample, without the coefficient.
  std::vector<double> forward_errors(const Tensor& obs, std::span<const int> actions,
                                     const Tensor& next_obs) const;

  Mlp& encoder() { return encoder_; }
  Mlp& inverse_model() { return inverse_; }
  Mlp& forward_model() { return forward_; }
  const GmcState* forward_gmc() const { return gmc_.get(); }

 private:
  IcmConfig config_;
  std::size_t num_actions_;
  Mlp encoder_;
  Mlp inverse_;
  Mlp forward_;
  Adam encoder_opt_;
  Adam inverse_opt_;
  Adam forward_opt_;
  Rng shuffle_rng_;
  std::unique_ptr<GmcState> gmc_;
  double gmc_coef_;
};

// Raw-observation dynamics model [s, one_hot(a)] -> s' trained with MSE; the
// reward is GMC over its parameters.
class GmcDynamics : public IntrinsicModule {
 public:
  GmcDynamics(std::size_t obs_dim, std::size_t num_actions, GmcRlConfig config, Rng& init_rng,
              Rng shuffle_rng);

  std::vector<double> rewards(const Tensor& obs, std::span<const int> actions,
                              const Tensor& next_obs) override;
  double train(const Tensor& obs, std::span<const int> actions, const Tensor& next_obs) override;

  Mlp& model() { return model_; }
  const GmcState& state() const { return state_; }

 private:
  GmcRlConfig config_;
  std::size_t num_actions_;
  Mlp model_;
  Adam opt_;
  GmcState state_;
  Rng shuffle_rng_;
};

struct RlConfig {
  AgentKind agent = AgentKind::kPpo;
  PpoConfig ppo;
  IcmConfig icm;
  GmcRlConfig gmc;
  DoorKeyConfig env;
  // Stop once the running mean episodic reward reaches this value (0 disables).
  double early_stop_reward = 0.0;
  std::size_t reward_window = 100;
  bool record_actions = false;

  void validate() const;
};

struct RolloutMetrics {
  std::size_t steps = 0;
  std::size_t episodes = 0;           // completed during this rollout
  double mean_episode_reward = 0.0;   // running mean over the last reward_window episodes
  double mean_intrinsic = 0.0;
  double intrinsic_loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct RlRunResult {
  std::vector<RolloutMetrics> rollouts;
  std::vector<double> episode_rewards;
  std::vector<int> actions;  // filled when record_actions is set
  std::vector<double> final_policy_params;
  bool stopped_early = false;

  double best_mean_reward() const;
  double final_mean_reward() const;
};

using RolloutCallback = std::function<void(const RolloutMetrics&)>;

RlRunResult run_rl(const RlConfig& config, std::uint64_t seed, const RolloutCallback& on_rollout = {});

}  // namespace gmc

#endif  // GMC_RL_AGENTS_HPP_
