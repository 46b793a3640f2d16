#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tns/mpo.hpp"
#include "tns/tensor.hpp"

namespace tns {

/// One weighted Pauli string. ops[n] is one of 'I', 'X', 'Y', 'Z' for site n;
/// site 0 is the leftmost character and the most significant qubit.
struct PauliTerm {
  cplx coeff;
  std::string ops;
};

Gate2 pauli_matrix(char p);

class PauliSum {
 public:
  explicit PauliSum(std::size_t n = 0) : n_(n) {}

  std::size_t size() const noexcept { return n_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }

  void add(cplx coeff, std::string ops);
  /// Adds `coeff` times the string with the given single-site factors.
  void add(cplx coeff, std::initializer_list<std::pair<std::size_t, char>> factors);
  PauliSum& operator+=(const PauliSum& other);

  /// Merges repeated strings (first occurrence order) and drops terms with |c| <= tol.
  PauliSum simplified(double tol = 0.0) const;
  /// Pauli strings are Hermitian, so the sum is Hermitian iff the merged coefficients are real.
  bool is_hermitian(double tol = 1e-12) const;

  Matrix to_dense() const;
  std::vector<cplx> apply(const std::vector<cplx>& psi) const;
  Mpo to_mpo(double cutoff = 1e-13) const;

  /// Lines `coeff_re coeff_im STRING` at 17 significant digits.
  void write(std::ostream& os) const;
  static PauliSum read(std::istream& is);
  std::string to_text() const;
  static PauliSum from_text(const std::string& text);

 private:
  std::size_t n_;
  std::vector<PauliTerm> terms_;
};

/// Dense commutator norm ||AB - BA||_F of two sums on the same chain.
double commutator_norm(const PauliSum& a, const PauliSum& b);

}  // namespace tns
