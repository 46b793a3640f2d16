#include "tns/mpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace tns {

Mpo::Mpo(std::vector<Tensor> sites) : sites_(std::move(sites)) { check_shapes(); }

void Mpo::check_shapes() const {
  if (sites_.empty()) throw std::invalid_argument("MPO needs at least one site");
  for (std::size_t n = 0; n < sites_.size(); ++n) {
    if (sites_[n].rank() != 4) throw std::invalid_argument(fmt::format("MPO site {} is not rank 4", n));
  }
  if (sites_.front().extent(0) != 1 || sites_.back().extent(3) != 1) {
    throw std::invalid_argument("MPO boundary bonds must have dimension 1");
  }
  for (std::size_t n = 0; n + 1 < sites_.size(); ++n) {
    if (sites_[n].extent(3) != sites_[n + 1].extent(0)) {
      throw std::invalid_argument(fmt::format("MPO bond mismatch between sites {} and {}", n, n + 1));
    }
  }
}

Mpo Mpo::identity(std::size_t n, std::size_t d) {
  std::vector<Matrix> ops(n, Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
  return product(ops);
}

Mpo Mpo::product(const std::vector<Matrix>& ops) {
  std::vector<Tensor> sites;
  sites.reserve(ops.size());
  for (const auto& op : ops) {
    const auto o = static_cast<std::size_t>(op.rows()), i = static_cast<std::size_t>(op.cols());
    sites.push_back(Tensor::from_matrix(op, {1, o, i, 1}));
  }
  return Mpo(std::move(sites));
}

std::vector<std::size_t> Mpo::bond_dims() const {
  std::vector<std::size_t> out;
  out.push_back(sites_.front().extent(0));
  for (const auto& t : sites_) out.push_back(t.extent(3));
  return out;
}

std::size_t Mpo::max_bond() const {
  std::size_t m = 1;
  for (const auto& t : sites_) m = std::max(m, t.extent(3));
  return m;
}

Mpo Mpo::adjoint() const {
  std::vector<Tensor> sites;
  sites.reserve(size());
  for (const auto& t : sites_) sites.push_back(t.permuted({0, 2, 1, 3}).conj());
  return Mpo(std::move(sites));
}

Matrix Mpo::to_dense() const {
  Tensor acc(Shape{1, 1, 1}, {cplx(1.0)});
  for (const auto& w : sites_) {
    Tensor c = contract(acc, {2}, w, {0});  // (Do, Di, o, i, r)
    const std::size_t dout = acc.extent(0) * w.extent(1), din = acc.extent(1) * w.extent(2);
    acc = c.permuted({0, 2, 1, 3, 4}).reshaped({dout, din, w.extent(3)});
  }
  const std::size_t dout = acc.extent(0), din = acc.extent(1);
  return acc.reshaped({dout, din}).matrix(1);
}

bool Mpo::finite() const {
  return std::all_of(sites_.begin(), sites_.end(), [](const Tensor& t) { return t.finite(); });
}

Mps Mpo::vectorize() const {
  std::vector<Tensor> sites;
  sites.reserve(size());
  for (const auto& w : sites_) sites.push_back(w.reshaped({w.extent(0), w.extent(1) * w.extent(2), w.extent(3)}));
  return Mps(std::move(sites));
}

Mpo Mpo::devectorize(const Mps& v, std::size_t d_out, std::size_t d_in) {
  std::vector<Tensor> sites;
  sites.reserve(v.size());
  for (const auto& a : v.sites()) {
    if (a.extent(1) != d_out * d_in) throw std::invalid_argument("devectorize: physical dimension mismatch");
    sites.push_back(a.reshaped({a.extent(0), d_out, d_in, a.extent(2)}));
  }
  return Mpo(std::move(sites));
}

Mpo multiply(const Mpo& a, const Mpo& b) {
  if (a.size() != b.size()) throw std::invalid_argument("multiply: site count mismatch");
  std::vector<Tensor> sites;
  sites.reserve(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    const Tensor& x = a[n];
    const Tensor& y = b[n];
    if (x.extent(2) != y.extent(1)) throw std::invalid_argument("multiply: physical dimension mismatch");
    Tensor c = contract(x, {2}, y, {1});  // (la, o, ra, lb, i, rb)
    sites.push_back(c.permuted({0, 3, 1, 4, 2, 5})
                        .reshaped({x.extent(0) * y.extent(0), x.extent(1), y.extent(2), x.extent(3) * y.extent(3)}));
  }
  return Mpo(std::move(sites));
}

cplx trace_inner(const Mpo& a, const Mpo& b) { return inner(a.vectorize(), b.vectorize()); }

double hs_infidelity(const Mpo& a, const Mpo& b) {
  const double aa = std::abs(trace_inner(a, a));
  const double bb = std::abs(trace_inner(b, b));
  return 1.0 - std::norm(trace_inner(a, b)) / (aa * bb);
}

Mpo compress(const Mpo& a, const TruncationPolicy& policy, double* discarded) {
  const std::size_t d_out = a.dim_out(0), d_in = a.dim_in(0);
  Mps v = a.vectorize();
  const double w = v.truncate(policy);
  if (discarded) *discarded = w;
  return Mpo::devectorize(v, d_out, d_in);
}

}  // namespace tns
