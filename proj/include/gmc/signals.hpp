#ifndef GMC_SIGNALS_HPP_
#define GMC_SIGNALS_HPP_

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmc/gmc_stats.hpp"
#include "gmc/mlp.hpp"
#include "gmc/param_store.hpp"

namespace gmc {

enum class SignalKind {
  kUniform,
  kCuriosity,
  kGmc,
  kNormLast,
  kNormAll,
  kDeltaLoss,
  kGmcDotProduct,
  kGmcCosine,
};

std::string_view to_string(SignalKind kind);
SignalKind parse_signal_kind(std::string_view name);
std::vector<SignalKind> all_signal_kinds();

// sum_i |g_i m_i / (v_i + eps)|, times 1/sqrt(d) when normalize_dim is set.
double gmc(std::span<const double> grads, const GmcState& state, bool normalize_dim = true);
// |sum_i g_i m_i / (v_i + eps)|
double gmc_dot_product(std::span<const double> grads, const GmcState& state,
                       bool normalize_dim = false);
// |g.m| / (||g|| ||m|| + eps)
double gmc_cosine(std::span<const double> grads, const GmcState& state);

inline double curiosity(double loss) { return loss; }
double norm_last(std::span<const double> grads, const Segment& last_layer, double scale = 1.0);
double norm_all(std::span<const double> grads, double scale = 1.0);

// Two disjoint consecutive windows of N dynamics losses per group: the
// most recent N and the N before them.
class LossWindow {
 public:
  LossWindow(std::size_t num_groups, std::size_t window);

  void push(int group, double loss);
  bool full(int group) const;
  std::size_t window() const { return window_; }
  std::size_t num_groups() const { return recent_.size(); }

  // -(mean(recent) - mean(previous)) / N * scale, or 0 until both windows fill.
  double delta_loss(int group, double scale = 1.0) const;

 private:
  void check(int group) const;

  std::size_t window_;
  std::vector<std::deque<double>> recent_;
  std::vector<std::deque<double>> previous_;
};

struct SignalScales {
  double norm_last = 1.0;
  double norm_all = 1.0;
  double delta_loss = 1.0;
};

// Everything a batch-level signal evaluation may read.
struct SignalBatch {
  std::span<const double> per_sample_loss;
  std::span<const int> groups;
};

// Per-sample intrinsic rewards for one batch.
//
// `model` must have just run backward() with per-sample (Reduction::kSum)
// upstream gradients, and `state` must not yet include this batch. DeltaLoss
// pushes the batch losses into `window` before reading it.
std::vector<double> batch_signal(SignalKind kind, const Mlp& model, const GmcState& state,
                                 const SignalBatch& batch, LossWindow& window,
                                 const SignalScales& scales, bool normalize_dim = true);

// True when the signal reads gradients (and therefore needs a backward pass per batch).
bool needs_gradients(SignalKind kind);

}  // namespace gmc

#endif  // GMC_SIGNALS_HPP_
