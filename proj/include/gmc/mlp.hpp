#ifndef GMC_MLP_HPP_
#define GMC_MLP_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "gmc/param_store.hpp"
#include "gmc/random.hpp"
#include "gmc/tensor.hpp"

namespace gmc {

enum class Activation { kReLU };

struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims = {256, 256};
  std::size_t output_dim = 1;
  Activation activation = Activation::kReLU;

  void validate() const;
  std::size_t num_layers() const { return hidden_dims.size() + 1; }
};

// Fully connected network with ReLU hidden layers and a linear head.
//
// Parameters live in a ParamStore with segments "layer<k>.weight" (out x in,
// row-major) and "layer<k>.bias". forward() caches the activations that
// backward() needs. backward() overwrites the stored gradients with the
// gradient of sum_i <grad_out_i, y_i>, i.e. each row of grad_out contributes
// one per-sample gradient g_i and grads() holds sum_i g_i.
//
// After backward(), the per_sample_* methods evaluate contractions of every
// g_i against a fixed parameter-space vector without materializing g_i. For a
// dense layer g_i = delta_i a_i^T, so these reduce to one extra matrix product
// per layer.
class Mlp {
 public:
  // Kaiming-uniform fan-in init: weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(MlpSpec spec, Rng& rng);
  // All-zero parameters.
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  // Training forward: caches intermediates for backward().
  const Tensor& forward(const Tensor& x);
  // Inference forward: no cache, leaves any pending backward state intact.
  Tensor predict(const Tensor& x) const;

  // Fills params().grads(); returns the gradient with respect to the input.
  Tensor backward(const Tensor& grad_out);

  bool has_backward() const { return has_backward_; }
  std::size_t cached_batch() const;

  // sum_p |g_ip| * weights_p for each sample i.
  std::vector<double> per_sample_weighted_l1(std::span<const double> weights) const;
  // sum_p g_ip * direction_p for each sample i.
  std::vector<double> per_sample_dot(std::span<const double> direction) const;
  // ||g_i||^2 for each sample i.
  std::vector<double> per_sample_sq_norm() const;
  // sum_i g_ip^2 for each parameter p (length num_params()).
  std::vector<double> per_sample_sq_grad_sum() const;
  // Same contractions restricted to a parameter range [offset, offset + length).
  std::vector<double> per_sample_weighted_l1(std::span<const double> weights,
                                             const Segment& range) const;

 private:
  void init_layout();
  void require_backward(std::size_t expected_len) const;

  MlpSpec spec_;
  ParamStore params_;
  std::vector<const Segment*> weight_seg_;
  std::vector<const Segment*> bias_seg_;

  // inputs_[k]: input to layer k (batch x in_k); pre_[k]: pre-activation of layer k.
  std::vector<RowMatrix> inputs_;
  std::vector<RowMatrix> pre_;
  std::vector<RowMatrix> deltas_;
  Tensor output_;
  bool has_forward_ = false;
  bool has_backward_ = false;
};

// Explicit per-sample gradients by looping backward with batch size one.
// grad_out supplies each sample's upstream gradient. Row i of the result is
// g_i, length num_params(). Leaves the model's cache in the batch-one state.
std::vector<std::vector<double>> per_sample_gradients(Mlp& model, const Tensor& x,
                                                      const Tensor& grad_out);

}  // namespace gmc

#endif  // GMC_MLP_HPP_
