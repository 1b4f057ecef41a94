#ifndef GMC_LOSS_HPP_
#define GMC_LOSS_HPP_

#include <span>
#include <vector>

#include "gmc/tensor.hpp"

namespace gmc {

enum class Reduction { kMean, kSum };

// Loss value, per-sample values and gradient with respect to the network output.
// With kSum the gradient row i is the gradient of sample i's own loss, which
// is what the per-sample contractions in Mlp expect.
struct LossOutput {
  double value = 0.0;
  std::vector<double> per_sample;
  Tensor grad;
};

// -log softmax(logits)[label], stabilized by max subtraction.
double cross_entropy_loss(std::span<const double> logits, int label);

LossOutput softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                 Reduction reduction = Reduction::kMean);

// Cross entropy against a uniform distribution over `candidates[i]`.
// A single candidate reduces to the hard-label case.
double expected_cross_entropy(std::span<const double> logits, std::span<const int> candidates);

// Per-sample mean over features of (pred - target)^2.
LossOutput mse_loss(const Tensor& pred, const Tensor& target,
                    Reduction reduction = Reduction::kMean);

// Per-sample 0.5 * ||pred - target||^2.
LossOutput half_squared_error(const Tensor& pred, const Tensor& target,
                              Reduction reduction = Reduction::kMean);

void softmax_inplace(std::span<double> logits);
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
double entropy(std::span<const double> probs);

}  // namespace gmc

#endif  // GMC_LOSS_HPP_
