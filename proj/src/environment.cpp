#include "tns/environment.hpp"

#include <stdexcept>

namespace tns {

Tensor trivial_environment() { return Tensor(Shape{1, 1, 1}, {cplx(1.0)}); }

Tensor grow_left(const Tensor& left, const Tensor& bra, const Tensor& w, const Tensor& ket) {
  Tensor x = contract(left, {2}, ket, {0});      // (a, w, t, c')
  Tensor y = contract(x, {1, 2}, w, {0, 2});     // (a, c', s, w')
  Tensor z = contract(bra.conj(), {0, 1}, y, {0, 2});  // (c, c', w')
  return z.permuted({0, 2, 1});
}

Tensor grow_right(const Tensor& right, const Tensor& bra, const Tensor& w, const Tensor& ket) {
  Tensor x = contract(ket, {2}, right, {2});     // (a', t, c, w')
  Tensor y = contract(x, {1, 3}, w, {2, 3});     // (a', c, w, s)
  Tensor z = contract(bra.conj(), {1, 2}, y, {3, 1});  // (a, a', w)
  return z.permuted({0, 2, 1});
}

cplx sandwich(const Mps& bra, const Mpo& op, const Mps& ket) {
  if (bra.size() != op.size() || ket.size() != op.size()) throw std::invalid_argument("sandwich: site count mismatch");
  Tensor env = trivial_environment();
  for (std::size_t n = 0; n < op.size(); ++n) env = grow_left(env, bra[n], op[n], ket[n]);
  return env.data()[0];
}

double expectation(const Mps& s, const Mpo& op) {
  return (sandwich(s, op, s) / inner(s, s)).real();
}

std::vector<cplx> local_expectations(const Mps& s, const Matrix& op) {
  Mps c = s;
  std::vector<cplx> out;
  out.reserve(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    c.canonicalize(n);
    const Tensor& a = c[n];
    const std::size_t l = a.extent(0), d = a.extent(1), r = a.extent(2);
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t p = 0; p < d; ++p) {
          den += std::norm(a(i, p, j));
          for (std::size_t q = 0; q < d; ++q) {
            num += std::conj(a(i, p, j)) * op(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) * a(i, q, j);
          }
        }
    out.push_back(num / den);
  }
  return out;
}

}  // namespace tns
