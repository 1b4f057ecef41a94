#include "gmc/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "gmc/errors.hpp"

namespace gmc {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (product(shape_) != data_.size()) {
    throw DimensionError("tensor shape product " + std::to_string(product(shape_)) +
                         " != data length " + std::to_string(data_.size()));
  }
  if (!all_finite(data_)) throw NumericalError("tensor contains NaN or Inf");
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  t.data_.assign(product(shape), 0.0);
  t.shape_ = std::move(shape);
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

Tensor Tensor::from_eigen(const RowMatrix& m) {
  Tensor t = zeros({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  t.as_matrix() = m;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() != 2) throw DimensionError("rows() requires a rank-2 tensor");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) throw DimensionError("cols() requires a rank-2 tensor");
  return shape_[1];
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

MatrixMap Tensor::as_matrix() {
  return MatrixMap(data_.data(), static_cast<Eigen::Index>(rows()),
                   static_cast<Eigen::Index>(cols()));
}

ConstMatrixMap Tensor::as_matrix() const {
  return ConstMatrixMap(data_.data(), static_cast<Eigen::Index>(rows()),
                        static_cast<Eigen::Index>(cols()));
}

}  // namespace gmc
