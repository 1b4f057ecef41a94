#ifndef GMC_TENSOR_HPP_
#define GMC_TENSOR_HPP_

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace gmc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

// Heap storage with Eigen's maximum packet alignment. Vectorized reductions
// peel a scalar prologue up to the first aligned element, so a buffer whose
// alignment varied between allocations would change the summation order and
// break bit-for-bit reproducibility.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

// Dense row-major float64 tensor. Inputs are validated to be finite on
// construction; shape product always equals the element count.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Tensor from_eigen(const RowMatrix& m);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  // Matrix view helpers; valid for rank-2 tensors only.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  MatrixMap as_matrix();
  ConstMatrixMap as_matrix() const;

 private:
  std::vector<std::size_t> shape_;
  AlignedBuffer data_;
};

bool all_finite(std::span<const double> values);

}  // namespace gmc

#endif  // GMC_TENSOR_HPP_
