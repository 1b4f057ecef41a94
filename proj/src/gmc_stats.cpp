#include "gmc/gmc_stats.hpp"

#include <cmath>
#include <string>

namespace gmc {

void GmcConfig::validate() const {
  if (!(beta0 > 0.0 && beta0 < 1.0) || !(beta1 > 0.0 && beta1 < 1.0)) {
    throw std::invalid_argument("GMC decays must lie in (0, 1)");
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("GMC epsilon must be >= 0");
}

GmcState::GmcState(std::size_t dim, GmcConfig config)
    : config_(config), m_(dim, 0.0), v_(dim, 0.0) {
  config_.validate();
}

void GmcState::update(std::span<const double> grads) {
  if (grads.size() != m_.size()) {
    throw DimensionError("GMC update: gradient length " + std::to_string(grads.size()) +
                         " != " + std::to_string(m_.size()));
  }
  const double b0 = config_.beta0;
  const double b1 = config_.beta1;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const double g = grads[i];
    m_[i] = b0 * m_[i] + (1.0 - b0) * g;
    v_[i] = b1 * v_[i] + (1.0 - b1) * g * g;
  }
  ++steps_;
}

void GmcState::update(std::span<const double> mean_grads,
                      std::span<const double> mean_sq_grads) {
  if (mean_grads.size() != m_.size() || mean_sq_grads.size() != m_.size()) {
    throw DimensionError("GMC update: statistic lengths do not match dim " +
                         std::to_string(m_.size()));
  }
  const double b0 = config_.beta0;
  const double b1 = config_.beta1;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = b0 * m_[i] + (1.0 - b0) * mean_grads[i];
    v_[i] = b1 * v_[i] + (1.0 - b1) * mean_sq_grads[i];
  }
  ++steps_;
}

std::vector<double> GmcState::momentum() const {
  if (!config_.bias_correction || steps_ == 0) return m_;
  const double c = 1.0 - std::pow(config_.beta0, static_cast<double>(steps_));
  std::vector<double> out(m_);
  for (double& x : out) x /= c;
  return out;
}

std::vector<double> GmcState::second_moment() const {
  if (!config_.bias_correction || steps_ == 0) return v_;
  const double c = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  std::vector<double> out(v_);
  for (double& x : out) x /= c;
  return out;
}

std::vector<double> GmcState::coupling_weights() const {
  auto w = coupling_direction();
  for (double& x : w) x = std::abs(x);
  return w;
}

std::vector<double> GmcState::coupling_direction() const {
  std::vector<double> m = momentum();
  const std::vector<double> v = second_moment();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] /= v[i] + config_.epsilon;
  return m;
}

double momentum_change_first_order(std::span<const double> m, std::span<const double> g) {
  if (m.size() != g.size()) throw DimensionError("momentum and gradient lengths differ");
  double dot = 0.0;
  double mm = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    dot += m[i] * g[i];
    mm += m[i] * m[i];
  }
  if (mm == 0.0) throw DegenerateMomentumError();
  return dot / std::sqrt(mm);
}

double momentum_change_exact(std::span<const double> m, std::span<const double> g) {
  if (m.size() != g.size()) throw DimensionError("momentum and gradient lengths differ");
  // ||m+g|| - ||m|| = (2 m.g + ||g||^2) / (||m+g|| + ||m||)
  double mg = 0.0;
  double gg = 0.0;
  double mm = 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    mg += m[i] * g[i];
    gg += g[i] * g[i];
    mm += m[i] * m[i];
    ss += (m[i] + g[i]) * (m[i] + g[i]);
  }
  const double denom = std::sqrt(ss) + std::sqrt(mm);
  return denom == 0.0 ? 0.0 : (2.0 * mg + gg) / denom;
}

}  // namespace gmc
