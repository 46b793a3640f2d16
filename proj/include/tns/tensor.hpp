#pragma once

// Dense complex tensors in row-major layout and the contraction helpers the
// network code is built on.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tns {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;
using Axes = std::vector<std::size_t>;

using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// Two-qubit gate; row/column index is 2*b_left + b_right.
using Gate4 = Eigen::Matrix<cplx, 4, 4, Eigen::RowMajor>;
using Gate2 = Eigen::Matrix<cplx, 2, 2, Eigen::RowMajor>;

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<cplx> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }

  template <class... I>
  cplx& operator()(I... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <class... I>
  const cplx& operator()(I... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;
  Tensor permuted(const Axes& perm) const;

  /// View as a matrix whose rows run over the first `row_axes` axes.
  MatrixMap matrix(std::size_t row_axes);
  ConstMatrixMap matrix(std::size_t row_axes) const;

  Tensor conj() const;
  double norm() const;
  bool finite() const;

  Tensor& operator*=(cplx factor);

  static Tensor from_matrix(const Matrix& m, Shape shape);

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const;

  Shape shape_;
  std::vector<cplx> data_;
};

std::size_t shape_volume(const Shape& shape);

/// tensordot: the result carries the free axes of `a` (in order) followed by
/// the free axes of `b`. axes_a[k] is contracted with axes_b[k].
Tensor contract(const Tensor& a, const Axes& axes_a, const Tensor& b, const Axes& axes_b);

}  // namespace tns
