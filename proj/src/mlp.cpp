#include "gmc/mlp.hpp"

#include <cmath>
#include <string>

#include "gmc/errors.hpp"

namespace gmc {

namespace {

using Eigen::Index;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatrixMap weight_map(std::span<const double> flat, const Segment& s, Index out, Index in) {
  return ConstMatrixMap(flat.data() + s.offset, out, in);
}

ConstVectorMap bias_map(std::span<const double> flat, const Segment& s) {
  return ConstVectorMap(flat.data() + s.offset, static_cast<Index>(s.length));
}

}  // namespace

void MlpSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) throw DimensionError("MLP dims must be >= 1");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw DimensionError("MLP hidden dims must be >= 1");
  }
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  init_layout();
}

Mlp::Mlp(MlpSpec spec, Rng& rng) : Mlp(std::move(spec)) {
  auto values = params_.values();
  for (std::size_t k = 0; k < weight_seg_.size(); ++k) {
    const Segment& w = *weight_seg_[k];
    const Segment& b = *bias_seg_[k];
    const std::size_t fan_in = w.length / b.length;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < w.length; ++i) values[w.offset + i] = dist(rng);
    for (std::size_t i = 0; i < b.length; ++i) values[b.offset + i] = dist(rng);
  }
}

void Mlp::init_layout() {
  std::vector<std::size_t> dims;
  dims.push_back(spec_.input_dim);
  dims.insert(dims.end(), spec_.hidden_dims.begin(), spec_.hidden_dims.end());
  dims.push_back(spec_.output_dim);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int layer = static_cast<int>(k);
    params_.add("layer" + std::to_string(k) + ".weight", dims[k + 1] * dims[k], layer);
    params_.add("layer" + std::to_string(k) + ".bias", dims[k + 1], layer);
  }
  // Pointers are taken after all appends so vector growth cannot invalidate them.
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    weight_seg_.push_back(&params_.segment("layer" + std::to_string(k) + ".weight"));
    bias_seg_.push_back(&params_.segment("layer" + std::to_string(k) + ".bias"));
  }
}

const Tensor& Mlp::forward(const Tensor& x) {
  if (x.rank() != 2 || x.cols() != spec_.input_dim) {
    throw DimensionError("MLP input must be (batch, " + std::to_string(spec_.input_dim) + ")");
  }
  const std::size_t layers = spec_.num_layers();
  inputs_.resize(layers);
  pre_.resize(layers);
  const auto values = params_.values();
  inputs_[0] = x.as_matrix();
  for (std::size_t k = 0; k < layers; ++k) {
    const Index out = static_cast<Index>(bias_seg_[k]->length);
    const Index in = inputs_[k].cols();
    auto W = weight_map(values, *weight_seg_[k], out, in);
    auto b = bias_map(values, *bias_seg_[k]);
    pre_[k].noalias() = inputs_[k] * W.transpose();
    pre_[k].rowwise() += b.transpose();
    if (k + 1 < layers) inputs_[k + 1] = pre_[k].cwiseMax(0.0);
  }
  output_ = Tensor::from_eigen(pre_.back());
  has_forward_ = true;
  has_backward_ = false;
  return output_;
}

Tensor Mlp::predict(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != spec_.input_dim) {
    throw DimensionError("MLP input must be (batch, " + std::to_string(spec_.input_dim) + ")");
  }
  const auto values = params_.values();
  RowMatrix h = x.as_matrix();
  const std::size_t layers = spec_.num_layers();
  for (std::size_t k = 0; k < layers; ++k) {
    const Index out = static_cast<Index>(bias_seg_[k]->length);
    auto W = weight_map(values, *weight_seg_[k], out, h.cols());
    auto b = bias_map(values, *bias_seg_[k]);
    RowMatrix z = h * W.transpose();
    z.rowwise() += b.transpose();
    if (k + 1 < layers) {
      h = z.cwiseMax(0.0);
    } else {
      h = std::move(z);
    }
  }
  return Tensor::from_eigen(h);
}

Tensor Mlp::backward(const Tensor& grad_out) {
  if (!has_forward_) throw StateError("backward() called without a preceding forward()");
  if (grad_out.rank() != 2 || grad_out.rows() != static_cast<std::size_t>(pre_.back().rows()) ||
      grad_out.cols() != spec_.output_dim) {
    throw DimensionError("upstream gradient shape does not match the cached output");
  }
  const std::size_t layers = spec_.num_layers();
  deltas_.resize(layers);
  deltas_[layers - 1] = grad_out.as_matrix();
  const auto values = params_.values();
  auto grads = params_.grads();
  RowMatrix grad_input;
  for (std::size_t k = layers; k-- > 0;) {
    const Segment& ws = *weight_seg_[k];
    const Segment& bs = *bias_seg_[k];
    const Index out = static_cast<Index>(bs.length);
    const Index in = inputs_[k].cols();
    MatrixMap gW(grads.data() + ws.offset, out, in);
    Eigen::Map<Eigen::VectorXd> gb(grads.data() + bs.offset, out);
    gW.noalias() = deltas_[k].transpose() * inputs_[k];
    gb = deltas_[k].colwise().sum().transpose();
    auto W = weight_map(values, ws, out, in);
    if (k > 0) {
      deltas_[k - 1].noalias() = deltas_[k] * W;
      deltas_[k - 1] = deltas_[k - 1].cwiseProduct(
          (pre_[k - 1].array() > 0.0).cast<double>().matrix());
    } else {
      grad_input.noalias() = deltas_[0] * W;
    }
  }
  has_backward_ = true;
  return Tensor::from_eigen(grad_input);
}

std::size_t Mlp::cached_batch() const {
  return has_forward_ ? static_cast<std::size_t>(inputs_[0].rows()) : 0;
}

void Mlp::require_backward(std::size_t expected_len) const {
  if (!has_backward_) throw StateError("per-sample statistics require a preceding backward()");
  if (expected_len != params_.size()) {
    throw DimensionError("parameter-space vector length " + std::to_string(expected_len) +
                         " != " + std::to_string(params_.size()));
  }
}

std::vector<double> Mlp::per_sample_weighted_l1(std::span<const double> weights) const {
  return per_sample_weighted_l1(weights, Segment{"all", 0, params_.size(), 0});
}

std::vector<double> Mlp::per_sample_weighted_l1(std::span<const double> weights,
                                                const Segment& range) const {
  require_backward(weights.size());
  // Aligned copy, for the same reason as AlignedBuffer.
  const Eigen::VectorXd w_copy = ConstVectorMap(weights.data(), static_cast<Index>(weights.size()));
  weights = std::span<const double>(w_copy.data(), weights.size());
  const Index batch = inputs_[0].rows();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(batch);
  auto inside = [&](const Segment& s) {
    const bool in = s.offset >= range.offset && s.end() <= range.end();
    const bool disjoint = s.end() <= range.offset || s.offset >= range.end();
    if (!in && !disjoint) throw DimensionError("range splits parameter segment " + s.name);
    return in;
  };
  for (std::size_t k = 0; k < weight_seg_.size(); ++k) {
    const Segment& ws = *weight_seg_[k];
    const Segment& bs = *bias_seg_[k];
    const Index out = static_cast<Index>(bs.length);
    const Index in = inputs_[k].cols();
    const RowMatrix abs_delta = deltas_[k].cwiseAbs();
    if (inside(ws)) {
      auto Wt = weight_map(weights, ws, out, in);
      const RowMatrix t = inputs_[k].cwiseAbs() * Wt.transpose();
      acc += abs_delta.cwiseProduct(t).rowwise().sum();
    }
    if (inside(bs)) acc += abs_delta * bias_map(weights, bs);
  }
  return {acc.data(), acc.data() + acc.size()};
}

std::vector<double> Mlp::per_sample_dot(std::span<const double> direction) const {
  require_backward(direction.size());
  const Eigen::VectorXd u_copy = ConstVectorMap(direction.data(), static_cast<Index>(direction.size()));
  direction = std::span<const double>(u_copy.data(), direction.size());
  const Index batch = inputs_[0].rows();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(batch);
  for (std::size_t k = 0; k < weight_seg_.size(); ++k) {
    const Index out = static_cast<Index>(bias_seg_[k]->length);
    const Index in = inputs_[k].cols();
    auto U = weight_map(direction, *weight_seg_[k], out, in);
    const RowMatrix t = inputs_[k] * U.transpose();
    acc += deltas_[k].cwiseProduct(t).rowwise().sum();
    acc += deltas_[k] * bias_map(direction, *bias_seg_[k]);
  }
  return {acc.data(), acc.data() + acc.size()};
}

std::vector<double> Mlp::per_sample_sq_norm() const {
  require_backward(params_.size());
  const Index batch = inputs_[0].rows();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(batch);
  for (std::size_t k = 0; k < weight_seg_.size(); ++k) {
    const Eigen::VectorXd d2 = deltas_[k].rowwise().squaredNorm();
    const Eigen::VectorXd a2 = inputs_[k].rowwise().squaredNorm();
    acc += d2.cwiseProduct(a2) + d2;
  }
  return {acc.data(), acc.data() + acc.size()};
}

std::vector<double> Mlp::per_sample_sq_grad_sum() const {
  require_backward(params_.size());
  AlignedBuffer out(params_.size(), 0.0);
  for (std::size_t k = 0; k < weight_seg_.size(); ++k) {
    const Segment& ws = *weight_seg_[k];
    const Segment& bs = *bias_seg_[k];
    const Index o = static_cast<Index>(bs.length);
    const Index in = inputs_[k].cols();
    const RowMatrix d2 = deltas_[k].cwiseAbs2();
    MatrixMap(out.data() + ws.offset, o, in).noalias() = d2.transpose() * inputs_[k].cwiseAbs2();
    Eigen::Map<Eigen::VectorXd>(out.data() + bs.offset, o) = d2.colwise().sum().transpose();
  }
  return {out.begin(), out.end()};
}

std::vector<std::vector<double>> per_sample_gradients(Mlp& model, const Tensor& x,
                                                      const Tensor& grad_out) {
  if (x.rank() != 2 || grad_out.rank() != 2 || x.rows() != grad_out.rows()) {
    throw DimensionError("per_sample_gradients: batch sizes differ");
  }
  std::vector<std::vector<double>> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xr = x.row(i);
    const auto gr = grad_out.row(i);
    model.forward(Tensor::matrix(1, x.cols(), {xr.begin(), xr.end()}));
    model.backward(Tensor::matrix(1, grad_out.cols(), {gr.begin(), gr.end()}));
    const auto g = model.params().grads();
    out.emplace_back(g.begin(), g.end());
  }
  return out;
}

}  // namespace gmc
