#ifndef GMC_SELECTION_POLICY_HPP_
#define GMC_SELECTION_POLICY_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "gmc/adam.hpp"
#include "gmc/mlp.hpp"
#include "gmc/random.hpp"
#include "gmc/tensor.hpp"

namespace gmc {

struct ActorConfig {
  int num_actions = 4;
  std::size_t noise_dim = 4;
  std::vector<std::size_t> hidden_dims = {256, 256};
  double entropy_weight = 0.05;
  AdamConfig adam{1e-5, 0.99, 0.999, 1e-8};

  void validate() const;
};

struct ActSample {
  int action = 0;
  double log_prob = 0.0;
  std::vector<double> probs;
};

// A batch of decisions together with the noise inputs that produced them,
// so the update can rebuild the same graph.
struct ActionBatch {
  Tensor noise;
  std::vector<int> actions;
  std::vector<double> log_probs;
  Tensor probs;

  std::size_t size() const { return actions.size(); }
};

struct PolicyUpdateStats {
  double loss = 0.0;
  double mean_entropy = 0.0;
};

// Stateless task-selection actor: an MLP fed fresh standard-normal noise whose
// softmax output is the action distribution. Trained with
//   L = -mean_j[log pi(a_j) r_j] - entropy_weight * mean_j H(pi_j)
// and one Adam step per batch.
class SelectionActor {
 public:
  SelectionActor(ActorConfig config, Rng& init_rng);

  const ActorConfig& config() const { return config_; }
  Mlp& network() { return net_; }
  const Mlp& network() const { return net_; }

  ActSample act(Rng& rng);
  ActionBatch act_batch(std::size_t n, Rng& rng);

  PolicyUpdateStats update(const ActionBatch& batch, std::span<const double> rewards);

  // Loss and gradient with respect to the logits, without touching parameters.
  // Exposed for gradient checks.
  static double policy_loss(const Tensor& logits, std::span<const int> actions,
                            std::span<const double> rewards, double entropy_weight,
                            Tensor* grad_logits, double* mean_entropy = nullptr);

 private:
  ActorConfig config_;
  Mlp net_;
  Adam adam_;
};

}  // namespace gmc

#endif  // GMC_SELECTION_POLICY_HPP_
