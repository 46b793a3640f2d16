#pragma once

#include <cstddef>
#include <vector>

#include "tns/mps.hpp"
#include "tns/tensor.hpp"

namespace tns {

/// Open-boundary matrix product operator. Site tensors have shape
/// (chi_left, d_out, d_in, chi_right).
class Mpo {
 public:
  Mpo() = default;
  explicit Mpo(std::vector<Tensor> sites);

  static Mpo identity(std::size_t n, std::size_t d = 2);
  /// Tensor product of one-site operators.
  static Mpo product(const std::vector<Matrix>& ops);

  std::size_t size() const noexcept { return sites_.size(); }
  std::size_t bond(std::size_t b) const { return sites_.at(b).extent(3); }
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond() const;
  std::size_t dim_out(std::size_t site) const { return sites_.at(site).extent(1); }
  std::size_t dim_in(std::size_t site) const { return sites_.at(site).extent(2); }

  const Tensor& operator[](std::size_t site) const { return sites_.at(site); }
  const std::vector<Tensor>& sites() const noexcept { return sites_; }

  Mpo adjoint() const;
  Matrix to_dense() const;
  bool finite() const;

  /// Operator as an MPS with physical index out*d_in + in.
  Mps vectorize() const;
  static Mpo devectorize(const Mps& v, std::size_t d_out = 2, std::size_t d_in = 2);

 private:
  void check_shapes() const;
  std::vector<Tensor> sites_;
};

/// a * b, exact (bond dimensions multiply).
Mpo multiply(const Mpo& a, const Mpo& b);
/// Tr(a^dagger b).
cplx trace_inner(const Mpo& a, const Mpo& b);
/// 1 - |Tr(a^dagger b)|^2 / (Tr(a^dagger a) Tr(b^dagger b)).
double hs_infidelity(const Mpo& a, const Mpo& b);
/// SVD compression in the Hilbert-Schmidt norm. Returns discarded weight via `discarded`.
Mpo compress(const Mpo& a, const TruncationPolicy& policy, double* discarded = nullptr);

}  // namespace tns
