#include "gmc/adam.hpp"

#include <cmath>

#include "gmc/errors.hpp"

namespace gmc {

Adam::Adam(std::size_t num_params, AdamConfig config)
    : config_(config), m_(num_params, 0.0), v_(num_params, 0.0) {}

void Adam::step(ParamStore& params) {
  if (params.size() != m_.size()) throw DimensionError("Adam state does not match parameter count");
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step_size = config_.lr / c1;
  const double sqrt_c2 = std::sqrt(c2);
  auto values = params.values();
  auto grads = params.grads();
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    values[i] -= step_size * m_[i] / (std::sqrt(v_[i]) / sqrt_c2 + config_.eps);
  }
}

}  // namespace gmc
