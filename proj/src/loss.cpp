#include "gmc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmc/errors.hpp"

namespace gmc {

void softmax_inplace(std::span<double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - mx);
    sum += z;
  }
  for (double& z : logits) z /= sum;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  softmax_inplace(p);
  return p;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double cross_entropy_loss(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw RangeError("label " + std::to_string(label) + " outside [0, " +
                     std::to_string(logits.size()) + ")");
  }
  return -log_softmax(logits)[static_cast<std::size_t>(label)];
}

double expected_cross_entropy(std::span<const double> logits, std::span<const int> candidates) {
  if (candidates.empty()) throw DimensionError("expected_cross_entropy needs a candidate label");
  const auto ls = log_softmax(logits);
  double total = 0.0;
  for (int c : candidates) {
    if (c < 0 || static_cast<std::size_t>(c) >= logits.size()) {
      throw RangeError("candidate label " + std::to_string(c) + " out of range");
    }
    total -= ls[static_cast<std::size_t>(c)];
  }
  return total / static_cast<double>(candidates.size());
}

LossOutput softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                 Reduction reduction) {
  if (logits.rank() != 2 || logits.rows() != labels.size()) {
    throw DimensionError("softmax_cross_entropy: logits rows != number of labels");
  }
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  const double scale = reduction == Reduction::kMean ? 1.0 / static_cast<double>(n) : 1.0;
  LossOutput out;
  out.per_sample.resize(n);
  out.grad = Tensor::zeros({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw RangeError("label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
    }
    auto g = out.grad.row(i);
    const auto row = logits.row(i);
    std::copy(row.begin(), row.end(), g.begin());
    const double mx = *std::max_element(g.begin(), g.end());
    double sum = 0.0;
    for (double& z : g) {
      z = std::exp(z - mx);
      sum += z;
    }
    out.per_sample[i] = -(row[static_cast<std::size_t>(y)] - mx - std::log(sum));
    for (double& z : g) z = z / sum * scale;
    g[static_cast<std::size_t>(y)] -= scale;
    out.value += out.per_sample[i];
  }
  out.value *= scale;
  return out;
}

namespace {

LossOutput squared_loss(const Tensor& pred, const Tensor& target, Reduction reduction,
                        double coef) {
  if (pred.shape() != target.shape() || pred.rank() != 2) {
    throw DimensionError("squared loss: prediction and target shapes differ");
  }
  const std::size_t n = pred.rows();
  const std::size_t k = pred.cols();
  const double scale = reduction == Reduction::kMean ? 1.0 / static_cast<double>(n) : 1.0;
  LossOutput out;
  out.per_sample.resize(n);
  out.grad = Tensor::zeros({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = pred(i, j) - target(i, j);
      s += d * d;
      out.grad(i, j) = 2.0 * coef * d * scale;
    }
    out.per_sample[i] = coef * s;
    out.value += out.per_sample[i];
  }
  out.value *= scale;
  return out;
}

}  // namespace

LossOutput mse_loss(const Tensor& pred, const Tensor& target, Reduction reduction) {
  return squared_loss(pred, target, reduction, 1.0 / static_cast<double>(pred.cols()));
}

LossOutput half_squared_error(const Tensor& pred, const Tensor& target, Reduction reduction) {
  return squared_loss(pred, target, reduction, 0.5);
}

}  // namespace gmc
