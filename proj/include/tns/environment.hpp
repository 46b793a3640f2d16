#pragma once

// Transfer-matrix environments for <bra| W |ket> networks. Environment tensors
// have shape (chi_bra, chi_mpo, chi_ket).

#include "tns/mpo.hpp"
#include "tns/mps.hpp"
#include "tns/tensor.hpp"

namespace tns {

Tensor trivial_environment();

/// Absorbs site (bra, w, ket) into a left environment.
Tensor grow_left(const Tensor& left, const Tensor& bra, const Tensor& w, const Tensor& ket);
/// Absorbs site (bra, w, ket) into a right environment.
Tensor grow_right(const Tensor& right, const Tensor& bra, const Tensor& w, const Tensor& ket);

/// <bra| op |ket>
cplx sandwich(const Mps& bra, const Mpo& op, const Mps& ket);
/// <s|op|s> / <s|s>
double expectation(const Mps& s, const Mpo& op);

/// Single-site expectation <s| op_site |s> / <s|s> for every site.
std::vector<cplx> local_expectations(const Mps& s, const Matrix& op);

}  // namespace tns
