#include "gmc/rl_agents.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gmc/errors.hpp"
#include "gmc/loss.hpp"
#include "gmc/param_store.hpp"

namespace gmc {

namespace {

enum Stream : std::uint64_t {
  kPolicyInit = 10,
  kActionSampling = 11,
  kPpoShuffle = 12,
  kEpisodeSeeds = 13,
  // Intrinsic modules draw only from these, so they never shift the PPO streams.
  kIntrinsicInit = 20,
  kIntrinsicShuffle = 21,
};

void require_positive(double x, const char* name) {
  if (!(x > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

Tensor gather_rows(const Tensor& src, std::span<const std::size_t> idx) {
  Tensor out = Tensor::zeros({idx.size(), src.cols()});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = src.row(idx[i]);
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

template <typename T>
std::vector<T> gather(std::span<const T> src, std::span<const std::size_t> idx) {
  std::vector<T> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = src[idx[i]];
  return out;
}

// Column blocks [a | b] of two tensors with equal row counts.
Tensor hstack(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros({a.rows(), a.cols() + b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    const auto ra = a.row(i);
    const auto rb = b.row(i);
    std::copy(ra.begin(), ra.end(), dst.begin());
    std::copy(rb.begin(), rb.end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

Tensor column_block(const Tensor& t, std::size_t first, std::size_t count, std::size_t row_begin = 0,
                    std::size_t row_count = static_cast<std::size_t>(-1)) {
  if (row_count == static_cast<std::size_t>(-1)) row_count = t.rows() - row_begin;
  Tensor out = Tensor::zeros({row_count, count});
  for (std::size_t i = 0; i < row_count; ++i) {
    const auto r = t.row(row_begin + i);
    std::copy(r.begin() + static_cast<std::ptrdiff_t>(first),
              r.begin() + static_cast<std::ptrdiff_t>(first + count), out.row(i).begin());
  }
  return out;
}

std::vector<std::vector<std::size_t>> shuffled_minibatches(std::size_t n, std::size_t size, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; s += size) {
    out.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(s),
                     idx.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + size)));
  }
  return out;
}

void scale_inplace(Tensor& t, double factor) {
  for (double& x : t.data()) x *= factor;
}

void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericalError(std::string(what) + " is not finite");
}

}  // namespace

void PpoConfig::validate() const {
  require_positive(gamma, "gamma");
  require_positive(gae_lambda, "gae_lambda");
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("clip must lie in (0, 1)");
  if (!(entropy_coef >= 0.0)) throw std::invalid_argument("entropy_coef must be >= 0");
  require_positive(max_grad_norm, "max_grad_norm");
  require_positive(policy_lr, "policy_lr");
  require_positive(value_lr, "value_lr");
  require_positive(reward_scaling, "reward_scaling");
  if (epochs == 0 || minibatch == 0 || rollout == 0 || total_steps == 0) {
    throw std::invalid_argument("PPO epochs, minibatch, rollout and total_steps must be >= 1");
  }
}

void IcmConfig::validate() const {
  if (feature_dim == 0 || minibatch == 0) throw std::invalid_argument("ICM feature_dim and minibatch must be >= 1");
  require_positive(lr, "icm lr");
  if (!(intrinsic_coef >= 0.0) || !(forward_weight >= 0.0) || !(inverse_weight >= 0.0)) {
    throw std::invalid_argument("ICM coefficients and loss weights must be >= 0");
  }
}

void GmcRlConfig::validate() const {
  stats().validate();
  require_positive(dynamics_lr, "dynamics_lr");
  if (!(intrinsic_coef >= 0.0)) throw std::invalid_argument("GMC intrinsic_coef must be >= 0");
  if (minibatch == 0) throw std::invalid_argument("GMC minibatch must be >= 1");
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kPpo: return "ppo";
    case AgentKind::kIcm: return "icm";
    case AgentKind::kGmc: return "gmc";
    case AgentKind::kIcmGmc: return "icm_gmc";
  }
  return "?";
}

AgentKind parse_agent_kind(std::string_view name) {
  std::string s(name);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::replace(s.begin(), s.end(), '+', '_');
  for (AgentKind k : {AgentKind::kPpo, AgentKind::kIcm, AgentKind::kGmc, AgentKind::kIcmGmc}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown agent '" + std::string(name) + "'");
}

Advantages gae_advantages(std::span<const double> rewards, std::span<const double> values,
                          const std::vector<bool>& dones, double last_value, double gamma,
                          double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw DimensionError("GAE inputs differ in length");
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = last_value;
  for (std::size_t t = n; t-- > 0;) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + values[t];
    next_value = values[t];
  }
  return out;
}

double ppo_policy_loss(const Tensor& logits, std::span<const int> actions,
                       std::span<const double> old_log_probs, std::span<const double> advantages,
                       double clip, double entropy_coef, Tensor* grad, double* mean_entropy,
                       std::vector<double>* ratios) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  if (actions.size() != n || old_log_probs.size() != n || advantages.size() != n) {
    throw DimensionError("ppo_policy_loss: batch sizes differ");
  }
  if (grad) *grad = Tensor::zeros({n, k});
  if (ratios) ratios->assign(n, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  double surrogate = 0.0;
  double ent_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ls = log_softmax(logits.row(i));
    const auto a = static_cast<std::size_t>(actions[i]);
    if (a >= k) throw RangeError("action outside the logit range");
    double h = 0.0;
    for (double l : ls) h -= std::exp(l) * l;
    const double r = std::exp(ls[a] - old_log_probs[i]);
    const double A = advantages[i];
    const double s1 = r * A;
    const double s2 = std::clamp(r, 1.0 - clip, 1.0 + clip) * A;
    surrogate -= std::min(s1, s2);
    ent_sum += h;
    if (ratios) (*ratios)[i] = r;
    if (grad) {
      // d(-min(s1, s2))/d log p(a) is -r A on the unclipped branch and 0 otherwise.
      const double g_logp = s1 <= s2 ? -r * A * inv_n : 0.0;
      auto g = grad->row(i);
      for (std::size_t j = 0; j < k; ++j) {
        const double p = std::exp(ls[j]);
        g[j] = g_logp * ((j == a ? 1.0 : 0.0) - p) + entropy_coef * p * (ls[j] + h) * inv_n;
      }
    }
  }
  if (mean_entropy) *mean_entropy = ent_sum * inv_n;
  return surrogate * inv_n - entropy_coef * ent_sum * inv_n;
}

ActorCritic::ActorCritic(std::size_t obs_dim, const PpoConfig& config, Rng& init_rng)
    : policy_(MlpSpec{obs_dim, config.hidden, static_cast<std::size_t>(kNumGridActions), Activation::kReLU},
              init_rng),
      value_(MlpSpec{obs_dim, config.hidden, 1, Activation::kReLU}, init_rng),
      policy_opt_(policy_.num_params(), AdamConfig{config.policy_lr, 0.9, 0.999, 1e-8}),
      value_opt_(value_.num_params(), AdamConfig{config.value_lr, 0.9, 0.999, 1e-8}) {}

std::pair<int, double> ActorCritic::act(std::span<const double> obs, Rng& rng) const {
  const Tensor logits =
      policy_.predict(Tensor::matrix(1, obs.size(), std::vector<double>(obs.begin(), obs.end())));
  const auto ls = log_softmax(logits.row(0));
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t a = ls.size() - 1;
  for (std::size_t j = 0; j < ls.size(); ++j) {
    acc += std::exp(ls[j]);
    if (u < acc) {
      a = j;
      break;
    }
  }
  return {static_cast<int>(a), ls[a]};
}

std::vector<double> ActorCritic::values(const Tensor& obs) const {
  const Tensor v = value_.predict(obs);
  return {v.data().begin(), v.data().end()};
}

PpoDiagnostics ActorCritic::update(const Trajectory& traj, const Advantages& adv,
                                   const PpoConfig& cfg, Rng& shuffle_rng) {
  const std::size_t n = traj.size();
  std::vector<double> A = adv.advantages;
  if (cfg.normalize_advantages && n > 1) {
    const double mean = std::accumulate(A.begin(), A.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : A) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : A) a = (a - mean) / (sd + 1e-8);
  }

  PpoDiagnostics diag;
  std::size_t updates = 0;
  std::size_t clipped = 0;
  std::size_t seen = 0;
  bool first = true;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& mb : shuffled_minibatches(n, cfg.minibatch, shuffle_rng)) {
      const Tensor x = gather_rows(traj.obs, mb);
      const auto actions = gather<int>(traj.actions, mb);
      const auto old_lp = gather<double>(traj.log_probs, mb);
      const auto mb_adv = gather<double>(A, mb);
      const auto mb_ret = gather<double>(adv.returns, mb);

      const Tensor& logits = policy_.forward(x);
      Tensor g;
      double ent = 0.0;
      std::vector<double> ratios;
      const double pl = ppo_policy_loss(logits, actions, old_lp, mb_adv, cfg.clip, cfg.entropy_coef, &g,
                                        &ent, &ratios);
      check_finite(pl, "PPO policy loss");
      policy_.backward(g);
      const double pn = clip_grad_norm(policy_.params(), cfg.max_grad_norm);
      diag.max_clipped_grad_norm = std::max(diag.max_clipped_grad_norm, policy_.params().grad_norm());
      policy_opt_.step(policy_.params());

      const Tensor& v = value_.forward(x);
      Tensor vg = Tensor::zeros({mb.size(), 1});
      double vl = 0.0;
      for (std::size_t i = 0; i < mb.size(); ++i) {
        const double d = v(i, 0) - mb_ret[i];
        vl += 0.5 * d * d;
        vg(i, 0) = d / static_cast<double>(mb.size());
      }
      vl /= static_cast<double>(mb.size());
      check_finite(vl, "PPO value loss");
      value_.backward(vg);
      const double vn = clip_grad_norm(value_.params(), cfg.max_grad_norm);
      diag.max_clipped_grad_norm = std::max(diag.max_clipped_grad_norm, value_.params().grad_norm());
      value_opt_.step(value_.params());

      for (std::size_t i = 0; i < mb.size(); ++i) {
        if (std::abs(ratios[i] - 1.0) > cfg.clip) ++clipped;
        diag.approx_kl -= std::log(ratios[i]);
        if (first) diag.first_ratio_max_dev = std::max(diag.first_ratio_max_dev, std::abs(ratios[i] - 1.0));
      }
      first = false;
      seen += mb.size();
      diag.policy_loss += pl;
      diag.value_loss += vl;
      diag.entropy += ent;
      diag.max_policy_grad_norm = std::max(diag.max_policy_grad_norm, pn);
      diag.max_value_grad_norm = std::max(diag.max_value_grad_norm, vn);
      ++updates;
    }
  }
  if (updates > 0) {
    diag.policy_loss /= static_cast<double>(updates);
    diag.value_loss /= static_cast<double>(updates);
    diag.entropy /= static_cast<double>(updates);
  }
  if (seen > 0) {
    diag.approx_kl /= static_cast<double>(seen);
    diag.clip_fraction = static_cast<double>(clipped) / static_cast<double>(seen);
  }
  return diag;
}

Tensor concat_one_hot(const Tensor& x, std::span<const int> actions, std::size_t num_actions) {
  if (x.rows() != actions.size()) throw DimensionError("concat_one_hot: rows != actions");
  Tensor out = Tensor::zeros({x.rows(), x.cols() + num_actions});
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    auto dst = out.row(i);
    std::copy(r.begin(), r.end(), dst.begin());
    const auto a = static_cast<std::size_t>(actions[i]);
    if (a >= num_actions) throw RangeError("action outside one-hot range");
    dst[x.cols() + a] = 1.0;
  }
  return out;
}

std::vector<double> per_sample_gmc(const Mlp& model, const GmcState& state) {
  std::vector<double> r = model.per_sample_weighted_l1(state.coupling_weights());
  const double scale = 1.0 / std::sqrt(static_cast<double>(model.num_params()));
  for (double& x : r) x *= scale;
  return r;
}

// ---- ICM ----

Icm::Icm(std::size_t obs_dim, std::size_t num_actions, IcmConfig config, Rng& init_rng, Rng shuffle_rng,
         bool track_forward_gmc, GmcConfig gmc_config, double gmc_coef)
    : config_((config.validate(), config)),
      num_actions_(num_actions),
      encoder_(MlpSpec{obs_dim, config.hidden, config.feature_dim, Activation::kReLU}, init_rng),
      inverse_(MlpSpec{2 * config.feature_dim, config.hidden, num_actions, Activation::kReLU}, init_rng),
      forward_(MlpSpec{config.feature_dim + num_actions, config.hidden, config.feature_dim,
                       Activation::kReLU},
               init_rng),
      encoder_opt_(encoder_.num_params(), AdamConfig{config.lr, 0.9, 0.999, 1e-8}),
      inverse_opt_(inverse_.num_params(), AdamConfig{config.lr, 0.9, 0.999, 1e-8}),
      forward_opt_(forward_.num_params(), AdamConfig{config.lr, 0.9, 0.999, 1e-8}),
      shuffle_rng_(std::move(shuffle_rng)),
      gmc_coef_(gmc_coef) {
  if (track_forward_gmc) gmc_ = std::make_unique<GmcState>(forward_.num_params(), gmc_config);
}

std::vector<double> Icm::forward_errors(const Tensor& obs, std::span<const int> actions,
                                        const Tensor& next_obs) const {
  const Tensor phi_s = encoder_.predict(obs);
  const Tensor phi_n = encoder_.predict(next_obs);
  const Tensor pred = forward_.predict(concat_one_hot(phi_s, actions, num_actions_));
  return half_squared_error(pred, phi_n, Reduction::kSum).per_sample;
}

std::vector<double> Icm::rewards(const Tensor& obs, std::span<const int> actions,
                                 const Tensor& next_obs) {
  if (!gmc_) {
    std::vector<double> r = forward_errors(obs, actions, next_obs);
    for (double& x : r) x *= config_.intrinsic_coef;
    return r;
  }
  // GMC over the forward model, using the same per-sample loss it trains on.
  const Tensor phi_s = encoder_.predict(obs);
  const Tensor phi_n = encoder_.predict(next_obs);
  const Tensor& pred = forward_.forward(concat_one_hot(phi_s, actions, num_actions_));
  LossOutput fl = mse_loss(pred, phi_n, Reduction::kSum);
  scale_inplace(fl.grad, config_.forward_weight);
  forward_.backward(fl.grad);
  std::vector<double> r = per_sample_gmc(forward_, *gmc_);
  for (double& x : r) x *= gmc_coef_;
  return r;
}

IcmLosses Icm::step(const Tensor& obs, std::span<const int> actions, const Tensor& next_obs) {
  const std::size_t n = obs.rows();
  const std::size_t k = config_.feature_dim;
  Tensor both = Tensor::zeros({2 * n, obs.cols()});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(obs.row(i).begin(), obs.row(i).end(), both.row(i).begin());
    std::copy(next_obs.row(i).begin(), next_obs.row(i).end(), both.row(n + i).begin());
  }
  const Tensor features = encoder_.forward(both);
  const Tensor phi_s = column_block(features, 0, k, 0, n);
  const Tensor phi_n = column_block(features, 0, k, n, n);

  // Forward loss: the target phi(s') is held fixed; gradients reach phi(s).
  const Tensor& pred = forward_.forward(concat_one_hot(phi_s, actions, num_actions_));
  LossOutput fl = mse_loss(pred, phi_n, Reduction::kMean);
  scale_inplace(fl.grad, config_.forward_weight);
  const Tensor d_fwd_in = forward_.backward(fl.grad);
  if (gmc_) {
    std::vector<double> sq = forward_.per_sample_sq_grad_sum();
    // Mean-reduced upstream gradients carry 1/n per sample; rescale to a mean of g_i^2.
    for (double& q : sq) q *= static_cast<double>(n);
    gmc_->update(forward_.params().grads(), sq);
  }

  const Tensor& logits = inverse_.forward(hstack(phi_s, phi_n));
  LossOutput il = softmax_cross_entropy(logits, actions, Reduction::kMean);
  scale_inplace(il.grad, config_.inverse_weight);
  const Tensor d_inv_in = inverse_.backward(il.grad);

  Tensor d_features = Tensor::zeros({2 * n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      d_features(i, j) = d_fwd_in(i, j) + d_inv_in(i, j);
      d_features(n + i, j) = d_inv_in(i, k + j);
    }
  }
  encoder_.backward(d_features);

  IcmLosses out{fl.value, il.value, config_.forward_weight * fl.value + config_.inverse_weight * il.value};
  check_finite(out.total, "ICM loss");
  encoder_opt_.step(encoder_.params());
  inverse_opt_.step(inverse_.params());
  forward_opt_.step(forward_.params());
  return out;
}

double Icm::train(const Tensor& obs, std::span<const int> actions, const Tensor& next_obs) {
  double total = 0.0;
  std::size_t batches = 0;
  for (const auto& mb : shuffled_minibatches(obs.rows(), config_.minibatch, shuffle_rng_)) {
    total += step(gather_rows(obs, mb), gather<int>(actions, mb), gather_rows(next_obs, mb)).total;
    ++batches;
  }
  return batches ? total / static_cast<double>(batches) : 0.0;
}

// ---- GMC on a raw dynamics model ----

GmcDynamics::GmcDynamics(std::size_t obs_dim, std::size_t num_actions, GmcRlConfig config,
                         Rng& init_rng, Rng shuffle_rng)
    : config_((config.validate(), config)),
      num_actions_(num_actions),
      model_(MlpSpec{obs_dim + num_actions, config.hidden, obs_dim, Activation::kReLU}, init_rng),
      opt_(model_.num_params(), AdamConfig{config.dynamics_lr, 0.9, 0.999, 1e-8}),
      state_(model_.num_params(), config.stats()),
      shuffle_rng_(std::move(shuffle_rng)) {}

std::vector<double> GmcDynamics::rewards(const Tensor& obs, std::span<const int> actions,
                                         const Tensor& next_obs) {
  const Tensor& pred = model_.forward(concat_one_hot(obs, actions, num_actions_));
  const LossOutput l = mse_loss(pred, next_obs, Reduction::kSum);
  model_.backward(l.grad);
  std::vector<double> r = per_sample_gmc(model_, state_);
  for (double& x : r) x *= config_.intrinsic_coef;
  return r;
}

double GmcDynamics::train(const Tensor& obs, std::span<const int> actions, const Tensor& next_obs) {
  double total = 0.0;
  std::size_t batches = 0;
  for (const auto& mb : shuffled_minibatches(obs.rows(), config_.minibatch, shuffle_rng_)) {
    const auto a = gather<int>(actions, mb);
    const Tensor& pred = model_.forward(concat_one_hot(gather_rows(obs, mb), a, num_actions_));
    const LossOutput l = mse_loss(pred, gather_rows(next_obs, mb), Reduction::kMean);
    check_finite(l.value, "dynamics loss");
    model_.backward(l.grad);
    std::vector<double> sq = model_.per_sample_sq_grad_sum();
    for (double& q : sq) q *= static_cast<double>(mb.size());
    state_.update(model_.params().grads(), sq);
    opt_.step(model_.params());
    total += l.value;
    ++batches;
  }
  return batches ? total / static_cast<double>(batches) : 0.0;
}

// ---- runner ----

void RlConfig::validate() const {
  ppo.validate();
  icm.validate();
  gmc.validate();
  env.validate();
  if (reward_window == 0) throw std::invalid_argument("reward_window must be >= 1");
}

double RlRunResult::best_mean_reward() const {
  double best = 0.0;
  for (const auto& r : rollouts) best = std::max(best, r.mean_episode_reward);
  return best;
}

double RlRunResult::final_mean_reward() const {
  return rollouts.empty() ? 0.0 : rollouts.back().mean_episode_reward;
}

RlRunResult run_rl(const RlConfig& config, std::uint64_t seed, const RolloutCallback& on_rollout) {
  config.validate();
  const PpoConfig& ppo = config.ppo;
  DoorKeyEnv env(config.env);
  const std::size_t obs_dim = static_cast<std::size_t>(config.env.size * config.env.size * kObsChannels);
  const std::size_t num_actions = static_cast<std::size_t>(kNumGridActions);

  Rng policy_init = make_rng(seed, kPolicyInit);
  ActorCritic agent(obs_dim, ppo, policy_init);
  Rng action_rng = make_rng(seed, kActionSampling);
  Rng ppo_shuffle = make_rng(seed, kPpoShuffle);
  Rng episode_seeds = make_rng(seed, kEpisodeSeeds);

  std::unique_ptr<IntrinsicModule> intrinsic;
  Rng int_init = make_rng(seed, kIntrinsicInit);
  switch (config.agent) {
    case AgentKind::kPpo:
      break;
    case AgentKind::kIcm:
      intrinsic = std::make_unique<Icm>(obs_dim, num_actions, config.icm, int_init,
                                        make_rng(seed, kIntrinsicShuffle));
      break;
    case AgentKind::kGmc:
      intrinsic = std::make_unique<GmcDynamics>(obs_dim, num_actions, config.gmc, int_init,
                                                make_rng(seed, kIntrinsicShuffle));
      break;
    case AgentKind::kIcmGmc:
      intrinsic = std::make_unique<Icm>(obs_dim, num_actions, config.icm, int_init,
                                        make_rng(seed, kIntrinsicShuffle), true, config.gmc.stats(),
                                        config.gmc.intrinsic_coef);
      break;
  }

  RlRunResult result;
  std::deque<double> recent;
  std::vector<double> current = env.reset(episode_seeds()).normalized();
  std::size_t steps = 0;

  while (steps < ppo.total_steps) {
    const std::size_t T = ppo.rollout;
    Trajectory traj;
    traj.obs = Tensor::zeros({T, obs_dim});
    traj.next_obs = Tensor::zeros({T, obs_dim});
    traj.actions.resize(T);
    traj.ext_rewards.resize(T);
    traj.log_probs.resize(T);
    traj.dones.resize(T);
    RolloutMetrics m;
    for (std::size_t t = 0; t < T; ++t) {
      std::copy(current.begin(), current.end(), traj.obs.row(t).begin());
      const auto [a, lp] = agent.act(current, action_rng);
      const StepResult sr = env.step(a);
      const std::vector<double> next = sr.observation.normalized();
      std::copy(next.begin(), next.end(), traj.next_obs.row(t).begin());
      traj.actions[t] = a;
      traj.log_probs[t] = lp;
      traj.ext_rewards[t] = sr.reward;
      traj.dones[t] = sr.done;
      if (config.record_actions) result.actions.push_back(a);
      if (sr.done) {
        result.episode_rewards.push_back(sr.reward);
        recent.push_back(sr.reward);
        if (recent.size() > config.reward_window) recent.pop_front();
        ++m.episodes;
        current = env.reset(episode_seeds()).normalized();
      } else {
        current = next;
      }
    }
    steps += T;

    traj.values = agent.values(traj.obs);
    traj.last_value =
        agent.values(Tensor::matrix(1, obs_dim, std::vector<double>(current.begin(), current.end())))[0];

    traj.int_rewards.assign(T, 0.0);
    if (intrinsic) traj.int_rewards = intrinsic->rewards(traj.obs, traj.actions, traj.next_obs);
    std::vector<double> total(T);
    for (std::size_t t = 0; t < T; ++t) {
      total[t] = traj.ext_rewards[t] * ppo.reward_scaling + traj.int_rewards[t];
    }
    const Advantages adv = gae_advantages(total, traj.values, traj.dones, traj.last_value, ppo.gamma,
                                          ppo.gae_lambda);
    const PpoDiagnostics diag = agent.update(traj, adv, ppo, ppo_shuffle);
    if (intrinsic) m.intrinsic_loss = intrinsic->train(traj.obs, traj.actions, traj.next_obs);

    m.steps = steps;
    m.mean_intrinsic = std::accumulate(traj.int_rewards.begin(), traj.int_rewards.end(), 0.0) /
                       static_cast<double>(T);
    m.mean_episode_reward =
        recent.empty() ? 0.0
                       : std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(recent.size());
    m.policy_loss = diag.policy_loss;
    m.value_loss = diag.value_loss;
    m.entropy = diag.entropy;
    result.rollouts.push_back(m);
    if (on_rollout) on_rollout(m);

    if (config.early_stop_reward > 0.0 && recent.size() >= config.reward_window &&
        m.mean_episode_reward >= config.early_stop_reward) {
      result.stopped_early = true;
      break;
    }
  }
  const auto pv = agent.policy().params().values();
  result.final_policy_params.assign(pv.begin(), pv.end());
  return result;
}

}  // namespace gmc
