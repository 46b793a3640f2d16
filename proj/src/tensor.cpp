#include "tns/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace tns {

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_volume(shape_)) {}

Tensor::Tensor(Shape shape, std::vector<cplx> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_volume(shape_) != data_.size()) {
    throw std::invalid_argument(
        fmt::format("tensor shape {} does not match data length {}", shape_, data_.size()));
  }
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : idx) {
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor out = *this;
  return std::move(out).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (shape_volume(shape) != data_.size()) {
    throw std::invalid_argument(fmt::format("cannot reshape {} to {}", shape_, shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

Tensor Tensor::permuted(const Axes& perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw std::invalid_argument("permutation rank mismatch");
  bool identity = true;
  for (std::size_t k = 0; k < r; ++k) identity = identity && perm[k] == k;
  if (identity) return *this;

  Shape new_shape(r);
  for (std::size_t k = 0; k < r; ++k) new_shape[k] = shape_[perm[k]];

  // strides of the source tensor, reordered to follow the destination axes
  std::vector<std::size_t> src_stride(r);
  {
    std::size_t s = 1;
    for (std::size_t k = r; k-- > 0;) {
      src_stride[k] = s;
      s *= shape_[k];
    }
  }
  std::vector<std::size_t> stride(r);
  for (std::size_t k = 0; k < r; ++k) stride[k] = src_stride[perm[k]];

  Tensor out(new_shape);
  if (out.size() == 0) return out;

  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  const std::size_t inner_extent = new_shape[r - 1];
  const std::size_t inner_stride = stride[r - 1];
  auto& dst = out.data_;
  for (std::size_t d = 0; d < dst.size(); d += inner_extent) {
    for (std::size_t i = 0; i < inner_extent; ++i) dst[d + i] = data_[src + i * inner_stride];
    // advance the outer counters
    for (std::size_t k = r - 1; k-- > 0;) {
      ++counter[k];
      src += stride[k];
      if (counter[k] < new_shape[k]) break;
      src -= stride[k] * counter[k];
      counter[k] = 0;
    }
  }
  return out;
}

MatrixMap Tensor::matrix(std::size_t row_axes) {
  std::size_t rows = 1;
  for (std::size_t k = 0; k < row_axes; ++k) rows *= shape_[k];
  const std::size_t cols = rows == 0 ? 0 : data_.size() / rows;
  return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

ConstMatrixMap Tensor::matrix(std::size_t row_axes) const {
  std::size_t rows = 1;
  for (std::size_t k = 0; k < row_axes; ++k) rows *= shape_[k];
  const std::size_t cols = rows == 0 ? 0 : data_.size() / rows;
  return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Tensor Tensor::conj() const {
  Tensor out = *this;
  for (auto& x : out.data_) x = std::conj(x);
  return out;
}

double Tensor::norm() const {
  double s = 0.0;
  for (const auto& x : data_) s += std::norm(x);
  return std::sqrt(s);
}

bool Tensor::finite() const {
  for (const auto& x : data_) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  }
  return true;
}

Tensor& Tensor::operator*=(cplx factor) {
  for (auto& x : data_) x *= factor;
  return *this;
}

Tensor Tensor::from_matrix(const Matrix& m, Shape shape) {
  std::vector<cplx> data(m.data(), m.data() + m.size());
  return Tensor(std::move(shape), std::move(data));
}

Tensor contract(const Tensor& a, const Axes& axes_a, const Tensor& b, const Axes& axes_b) {
  if (axes_a.size() != axes_b.size()) throw std::invalid_argument("contract: axis count mismatch");
  const std::size_t ra = a.rank();
  const std::size_t rb = b.rank();
  std::vector<bool> used_a(ra, false), used_b(rb, false);
  std::size_t inner = 1;
  for (std::size_t k = 0; k < axes_a.size(); ++k) {
    if (a.extent(axes_a[k]) != b.extent(axes_b[k])) {
      throw std::invalid_argument(fmt::format("contract: extent mismatch {} vs {} ({} . {})",
                                              a.extent(axes_a[k]), b.extent(axes_b[k]), a.shape(),
                                              b.shape()));
    }
    used_a[axes_a[k]] = true;
    used_b[axes_b[k]] = true;
    inner *= a.extent(axes_a[k]);
  }

  Axes perm_a, perm_b;
  Shape out_shape;
  std::size_t rows = 1, cols = 1;
  for (std::size_t k = 0; k < ra; ++k) {
    if (!used_a[k]) {
      perm_a.push_back(k);
      out_shape.push_back(a.extent(k));
      rows *= a.extent(k);
    }
  }
  perm_a.insert(perm_a.end(), axes_a.begin(), axes_a.end());
  perm_b = axes_b;
  for (std::size_t k = 0; k < rb; ++k) {
    if (!used_b[k]) {
      perm_b.push_back(k);
      out_shape.push_back(b.extent(k));
      cols *= b.extent(k);
    }
  }

  const Tensor pa = a.permuted(perm_a);
  const Tensor pb = b.permuted(perm_b);
  ConstMatrixMap ma(pa.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(inner));
  ConstMatrixMap mb(pb.data().data(), static_cast<Eigen::Index>(inner), static_cast<Eigen::Index>(cols));
  Tensor out(out_shape);
  MatrixMap mo(out.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  mo.noalias() = ma * mb;
  return out;
}

}  // namespace tns
