#include "gmc/signals.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "gmc/errors.hpp"

namespace gmc {

namespace {

constexpr std::pair<SignalKind, std::string_view> kNames[] = {
    {SignalKind::kUniform, "uniform"},     {SignalKind::kCuriosity, "curiosity"},
    {SignalKind::kGmc, "gmc"},             {SignalKind::kNormLast, "normlast"},
    {SignalKind::kNormAll, "normall"},     {SignalKind::kDeltaLoss, "deltaloss"},
    {SignalKind::kGmcDotProduct, "gmc_dot"}, {SignalKind::kGmcCosine, "gmc_cosine"},
};

void check_len(std::span<const double> grads, const GmcState& state) {
  if (grads.size() != state.dim()) {
    throw DimensionError("gradient length " + std::to_string(grads.size()) +
                         " != GMC state dim " + std::to_string(state.dim()));
  }
}

double dim_factor(std::size_t d, bool normalize_dim) {
  return normalize_dim ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;
}

double mean(const std::deque<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

std::string_view to_string(SignalKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

SignalKind parse_signal_kind(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& [k, n] : kNames) {
    if (n == lower) return k;
  }
  throw std::invalid_argument("unknown signal: " + std::string(name));
}

std::vector<SignalKind> all_signal_kinds() {
  std::vector<SignalKind> out;
  for (const auto& [k, name] : kNames) out.push_back(k);
  return out;
}

double gmc(std::span<const double> grads, const GmcState& state, bool normalize_dim) {
  check_len(grads, state);
  const auto w = state.coupling_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) sum += std::abs(grads[i]) * w[i];
  return sum * dim_factor(grads.size(), normalize_dim);
}

double gmc_dot_product(std::span<const double> grads, const GmcState& state,
                       bool normalize_dim) {
  check_len(grads, state);
  const auto u = state.coupling_direction();
  double sum = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) sum += grads[i] * u[i];
  return std::abs(sum) * dim_factor(grads.size(), normalize_dim);
}

double gmc_cosine(std::span<const double> grads, const GmcState& state) {
  check_len(grads, state);
  const auto m = state.momentum();
  double gm = 0.0, gg = 0.0, mm = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    gm += grads[i] * m[i];
    gg += grads[i] * grads[i];
    mm += m[i] * m[i];
  }
  return std::abs(gm) / (std::sqrt(gg) * std::sqrt(mm) + state.config().epsilon);
}

double norm_last(std::span<const double> grads, const Segment& last_layer, double scale) {
  if (last_layer.end() > grads.size()) throw DimensionError("last-layer range exceeds gradient");
  return norm_all(grads.subspan(last_layer.offset, last_layer.length), scale);
}

double norm_all(std::span<const double> grads, double scale) {
  double sum = 0.0;
  for (double g : grads) sum += std::abs(g);
  return sum * scale;
}

LossWindow::LossWindow(std::size_t num_groups, std::size_t window)
    : window_(window), recent_(num_groups), previous_(num_groups) {
  if (window == 0) throw std::invalid_argument("loss window length must be >= 1");
}

void LossWindow::check(int group) const {
  if (group < 0 || static_cast<std::size_t>(group) >= recent_.size()) {
    throw RangeError("group id " + std::to_string(group) + " out of range");
  }
}

void LossWindow::push(int group, double loss) {
  check(group);
  auto& recent = recent_[static_cast<std::size_t>(group)];
  auto& previous = previous_[static_cast<std::size_t>(group)];
  recent.push_back(loss);
  if (recent.size() > window_) {
    previous.push_back(recent.front());
    recent.pop_front();
    if (previous.size() > window_) previous.pop_front();
  }
}

bool LossWindow::full(int group) const {
  check(group);
  return recent_[static_cast<std::size_t>(group)].size() == window_ &&
         previous_[static_cast<std::size_t>(group)].size() == window_;
}

double LossWindow::delta_loss(int group, double scale) const {
  if (!full(group)) return 0.0;
  const double change =
      mean(recent_[static_cast<std::size_t>(group)]) - mean(previous_[static_cast<std::size_t>(group)]);
  return -change / static_cast<double>(window_) * scale;
}

bool needs_gradients(SignalKind kind) {
  switch (kind) {
    case SignalKind::kUniform:
    case SignalKind::kCuriosity:
    case SignalKind::kDeltaLoss:
      return false;
    default:
      return true;
  }
}

std::vector<double> batch_signal(SignalKind kind, const Mlp& model, const GmcState& state,
                                 const SignalBatch& batch, LossWindow& window,
                                 const SignalScales& scales, bool normalize_dim) {
  const std::size_t n = batch.per_sample_loss.size();
  std::vector<double> r(n, 0.0);
  const double dnorm = dim_factor(model.num_params(), normalize_dim);
  switch (kind) {
    case SignalKind::kUniform:
      break;
    case SignalKind::kCuriosity:
      for (std::size_t i = 0; i < n; ++i) r[i] = curiosity(batch.per_sample_loss[i]);
      break;
    case SignalKind::kGmc: {
      r = model.per_sample_weighted_l1(state.coupling_weights());
      for (double& x : r) x *= dnorm;
      break;
    }
    case SignalKind::kGmcDotProduct: {
      r = model.per_sample_dot(state.coupling_direction());
      for (double& x : r) x = std::abs(x) * dnorm;
      break;
    }
    case SignalKind::kGmcCosine: {
      const auto m = state.momentum();
      const auto dots = model.per_sample_dot(m);
      const auto sq = model.per_sample_sq_norm();
      double mm = 0.0;
      for (double x : m) mm += x * x;
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = std::abs(dots[i]) / (std::sqrt(sq[i]) * std::sqrt(mm) + state.config().epsilon);
      }
      break;
    }
    case SignalKind::kNormAll: {
      const std::vector<double> ones(model.num_params(), 1.0);
      r = model.per_sample_weighted_l1(ones);
      for (double& x : r) x *= scales.norm_all;
      break;
    }
    case SignalKind::kNormLast: {
      const std::vector<double> ones(model.num_params(), 1.0);
      r = model.per_sample_weighted_l1(ones, model.params().last_layer());
      for (double& x : r) x *= scales.norm_last;
      break;
    }
    case SignalKind::kDeltaLoss: {
      if (batch.groups.size() != n) throw DimensionError("DeltaLoss needs a group per sample");
      for (std::size_t i = 0; i < n; ++i) window.push(batch.groups[i], batch.per_sample_loss[i]);
      for (std::size_t i = 0; i < n; ++i) r[i] = window.delta_loss(batch.groups[i], scales.delta_loss);
      break;
    }
  }
  if (needs_gradients(kind) && r.size() != n) {
    throw DimensionError("cached backward batch does not match the loss batch");
  }
  return r;
}

}  // namespace gmc
