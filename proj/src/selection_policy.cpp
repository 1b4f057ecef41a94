#include "gmc/selection_policy.hpp"

#include <cmath>
#include <sstream>

#include "gmc/errors.hpp"
#include "gmc/loss.hpp"

namespace gmc {

namespace {

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

void ActorConfig::validate() const {
  if (num_actions < 2) throw std::invalid_argument("actor needs at least two actions");
  if (noise_dim == 0) throw std::invalid_argument("actor noise_dim must be >= 1");
  if (!(entropy_weight >= 0.0)) throw std::invalid_argument("entropy weight must be >= 0");
}

SelectionActor::SelectionActor(ActorConfig config, Rng& init_rng)
    : config_(std::move(config)),
      net_((config_.validate(),
            MlpSpec{config_.noise_dim, config_.hidden_dims,
                    static_cast<std::size_t>(config_.num_actions), Activation::kReLU}),
           init_rng),
      adam_(net_.num_params(), config_.adam) {}

ActSample SelectionActor::act(Rng& rng) {
  ActionBatch b = act_batch(1, rng);
  const auto p = b.probs.row(0);
  return ActSample{b.actions[0], b.log_probs[0], {p.begin(), p.end()}};
}

ActionBatch SelectionActor::act_batch(std::size_t n, Rng& rng) {
  ActionBatch b;
  b.noise = Tensor::zeros({n, config_.noise_dim});
  for (double& z : b.noise.data()) z = standard_normal(rng);
  b.probs = net_.predict(b.noise);
  b.actions.resize(n);
  b.log_probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = b.probs.row(i);
    const auto lp = log_softmax(row);
    softmax_inplace(row);
    b.actions[i] = sample_categorical(row, rng);
    b.log_probs[i] = lp[static_cast<std::size_t>(b.actions[i])];
  }
  return b;
}

double SelectionActor::policy_loss(const Tensor& logits, std::span<const int> actions,
                                   std::span<const double> rewards, double entropy_weight,
                                   Tensor* grad_logits, double* mean_entropy) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  if (actions.size() != n || rewards.size() != n) {
    throw DimensionError("policy loss: batch, action and reward counts differ");
  }
  if (grad_logits) *grad_logits = Tensor::zeros({n, k});
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  double h_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto lp = log_softmax(logits.row(i));
    std::vector<double> p(k);
    for (std::size_t j = 0; j < k; ++j) p[j] = std::exp(lp[j]);
    double h = 0.0;
    for (std::size_t j = 0; j < k; ++j) h -= p[j] * lp[j];
    const auto a = static_cast<std::size_t>(actions[i]);
    if (a >= k) throw RangeError("action index out of range in policy loss");
    const double r = rewards[i];
    loss += (-lp[a] * r - entropy_weight * h) * inv_n;
    h_sum += h;
    if (grad_logits) {
      auto g = grad_logits->row(i);
      for (std::size_t j = 0; j < k; ++j) {
        // d(-r log p_a)/dz_j = r (p_j - [j==a]);  d(-H)/dz_j = p_j (log p_j + H)
        const double pg = r * (p[j] - (j == a ? 1.0 : 0.0));
        const double eg = entropy_weight * p[j] * (lp[j] + h);
        g[j] = (pg + eg) * inv_n;
      }
    }
  }
  if (mean_entropy) *mean_entropy = h_sum * inv_n;
  return loss;
}

PolicyUpdateStats SelectionActor::update(const ActionBatch& batch,
                                         std::span<const double> rewards) {
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!std::isfinite(rewards[i])) {
      std::ostringstream msg;
      msg << "non-finite intrinsic reward " << rewards[i] << " at batch index " << i;
      throw NumericalError(msg.str());
    }
  }
  const Tensor& logits = net_.forward(batch.noise);
  Tensor grad;
  PolicyUpdateStats stats;
  stats.loss = policy_loss(logits, batch.actions, rewards, config_.entropy_weight, &grad,
                           &stats.mean_entropy);
  net_.backward(grad);
  adam_.step(net_.params());
  return stats;
}

}  // namespace gmc
