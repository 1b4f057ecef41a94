#ifndef GMC_GMC_STATS_HPP_
#define GMC_GMC_STATS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "gmc/errors.hpp"

namespace gmc {

struct GmcConfig {
  double beta0 = 0.999;  // momentum decay
  double beta1 = 0.999;  // second-moment decay
  double epsilon = 1e-8;
  bool bias_correction = false;

  void validate() const;
};

// Per-parameter gradient EWMAs kept apart from any optimizer:
//   m <- beta0 m + (1 - beta0) g,   v <- beta1 v + (1 - beta1) g^2
// With beta0 == beta1 and zero init, m_i^2 <= v_i after every update (Jensen).
class GmcState {
 public:
  GmcState(std::size_t dim, GmcConfig config);

  void update(std::span<const double> grads);
  // Batch form: m tracks the batch-mean gradient and v the batch mean of the
  // squared per-sample gradients. mean_sq_grads_i >= mean_grads_i^2 keeps m^2 <= v.
  void update(std::span<const double> mean_grads, std::span<const double> mean_sq_grads);

  std::size_t dim() const { return m_.size(); }
  const GmcConfig& config() const { return config_; }
  std::int64_t step_count() const { return steps_; }
  std::span<const double> m() const { return m_; }
  std::span<const double> v() const { return v_; }

  // m and v as seen by the signals; equal to m(), v() unless bias correction is on.
  std::vector<double> momentum() const;
  std::vector<double> second_moment() const;

  // |m_i| / (v_i + eps): per-parameter weights of the coupling sum.
  std::vector<double> coupling_weights() const;
  // m_i / (v_i + eps): signed version used by the dot-product variant.
  std::vector<double> coupling_direction() const;

 private:
  GmcConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t steps_ = 0;
};

class DegenerateMomentumError : public std::domain_error {
 public:
  DegenerateMomentumError() : std::domain_error("momentum has zero norm") {}
};

// First-order change of ||m|| when g is added: m^T g / ||m||.
double momentum_change_first_order(std::span<const double> m, std::span<const double> g);
// ||m + g|| - ||m||, evaluated without cancellation.
double momentum_change_exact(std::span<const double> m, std::span<const double> g);

}  // namespace gmc

#endif  // GMC_GMC_STATS_HPP_
