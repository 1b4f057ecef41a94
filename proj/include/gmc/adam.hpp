#ifndef GMC_ADAM_HPP_
#define GMC_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "gmc/param_store.hpp"

namespace gmc {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction, matching torch.optim.Adam defaults.
class Adam {
 public:
  Adam(std::size_t num_params, AdamConfig config);

  void step(ParamStore& params);
  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

}  // namespace gmc

#endif  // GMC_ADAM_HPP_
