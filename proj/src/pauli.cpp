#include "tns/pauli.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace tns {

Gate2 pauli_matrix(char p) {
  const cplx i(0.0, 1.0);
  Gate2 m;
  switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument(fmt::format("unknown Pauli '{}'", p));
  }
  return m;
}

namespace {

void check_string(const std::string& ops, std::size_t n) {
  if (ops.size() != n) throw std::invalid_argument(fmt::format("Pauli string '{}' does not have {} sites", ops, n));
  for (char c : ops) {
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') throw std::invalid_argument(fmt::format("bad Pauli string '{}'", ops));
  }
}

}  // namespace

void PauliSum::add(cplx coeff, std::string ops) {
  check_string(ops, n_);
  terms_.push_back({coeff, std::move(ops)});
}

void PauliSum::add(cplx coeff, std::initializer_list<std::pair<std::size_t, char>> factors) {
  std::string ops(n_, 'I');
  for (auto [site, p] : factors) ops.at(site) = p;
  add(coeff, std::move(ops));
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (other.n_ != n_) throw std::invalid_argument("PauliSum: site count mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

PauliSum PauliSum::simplified(double tol) const {
  std::map<std::string, std::size_t> index;
  std::vector<PauliTerm> merged;
  for (const auto& t : terms_) {
    auto [it, fresh] = index.emplace(t.ops, merged.size());
    if (fresh) merged.push_back(t);
    else merged[it->second].coeff += t.coeff;
  }
  PauliSum out(n_);
  for (auto& t : merged) {
    if (std::abs(t.coeff) > tol) out.terms_.push_back(std::move(t));
  }
  return out;
}

bool PauliSum::is_hermitian(double tol) const {
  for (const auto& t : simplified().terms_) {
    if (std::abs(t.coeff.imag()) > tol) return false;
  }
  return true;
}

std::vector<cplx> PauliSum::apply(const std::vector<cplx>& psi) const {
  const std::size_t dim = std::size_t{1} << n_;
  if (psi.size() != dim) throw std::invalid_argument("PauliSum::apply: vector dimension mismatch");
  std::vector<cplx> out(dim, 0.0);
  const cplx i(0.0, 1.0);
  for (const auto& t : terms_) {
    std::size_t flip = 0, zmask = 0, ny = 0;
    for (std::size_t n = 0; n < n_; ++n) {
      const std::size_t bit = std::size_t{1} << (n_ - 1 - n);
      const char p = t.ops[n];
      if (p == 'X' || p == 'Y') flip |= bit;
      if (p == 'Y' || p == 'Z') zmask |= bit;
      if (p == 'Y') ++ny;
    }
    // Y = i X Z, so the string is i^ny X^flip Z^zmask (Z acting first)
    cplx phase = 1.0;
    for (std::size_t k = 0; k < ny % 4; ++k) phase *= i;
    const cplx c = t.coeff * phase;
    for (std::size_t b = 0; b < dim; ++b) {
      const bool odd = __builtin_popcountll(b & zmask) & 1;
      out[b ^ flip] += (odd ? -c : c) * psi[b];
    }
  }
  return out;
}

Matrix PauliSum::to_dense() const {
  const std::size_t dim = std::size_t{1} << n_;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<cplx> e(dim, 0.0);
  for (std::size_t col = 0; col < dim; ++col) {
    e[col] = 1.0;
    const auto v = apply(e);
    for (std::size_t row = 0; row < dim; ++row) m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v[row];
    e[col] = 0.0;
  }
  return m;
}

namespace {

Mpo direct_sum(const Mpo& a, const Mpo& b) {
  const std::size_t n = a.size();
  std::vector<Tensor> sites;
  for (std::size_t s = 0; s < n; ++s) {
    const Tensor& x = a[s];
    const Tensor& y = b[s];
    const std::size_t d = x.extent(1);
    const std::size_t lx = x.extent(0), rx = x.extent(3), ly = y.extent(0), ry = y.extent(3);
    const std::size_t l = (s == 0) ? 1 : lx + ly;
    const std::size_t r = (s + 1 == n) ? 1 : rx + ry;
    Tensor t({l, d, d, r});
    for (std::size_t i = 0; i < lx; ++i)
      for (std::size_t o = 0; o < d; ++o)
        for (std::size_t p = 0; p < d; ++p)
          for (std::size_t j = 0; j < rx; ++j) t(i, o, p, j) += x(i, o, p, j);
    const std::size_t ol = (s == 0) ? 0 : lx, orr = (s + 1 == n) ? 0 : rx;
    for (std::size_t i = 0; i < ly; ++i)
      for (std::size_t o = 0; o < d; ++o)
        for (std::size_t p = 0; p < d; ++p)
          for (std::size_t j = 0; j < ry; ++j) t(ol + i, o, p, orr + j) += y(i, o, p, j);
    sites.push_back(std::move(t));
  }
  return Mpo(std::move(sites));
}

}  // namespace

Mpo PauliSum::to_mpo(double cutoff) const {
  const auto terms = simplified().terms_;
  if (terms.empty()) {
    std::vector<Matrix> zeros(n_, Matrix::Zero(2, 2));
    return Mpo::product(zeros);
  }
  std::optional<Mpo> acc;
  for (const auto& t : terms) {
    std::vector<Matrix> ops;
    for (std::size_t n = 0; n < n_; ++n) ops.push_back(pauli_matrix(t.ops[n]));
    ops[0] *= t.coeff;
    Mpo term = Mpo::product(ops);
    acc = acc ? compress(direct_sum(*acc, term), TruncationPolicy::with_cutoff(cutoff)) : term;
  }
  return *acc;
}

void PauliSum::write(std::ostream& os) const {
  char buf[64];
  for (const auto& t : terms_) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g ", t.coeff.real(), t.coeff.imag());
    os << buf << t.ops << '\n';
  }
}

PauliSum PauliSum::read(std::istream& is) {
  std::vector<PauliTerm> terms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string re, im, ops;
    if (!(ls >> re >> im >> ops)) throw std::invalid_argument(fmt::format("Pauli text line {}: expected 3 fields", lineno));
    double vr = 0.0, vi = 0.0;
    auto r1 = std::from_chars(re.data(), re.data() + re.size(), vr);
    auto r2 = std::from_chars(im.data(), im.data() + im.size(), vi);
    if (r1.ec != std::errc() || r2.ec != std::errc()) {
      throw std::invalid_argument(fmt::format("Pauli text line {}: bad coefficient", lineno));
    }
    terms.push_back({cplx(vr, vi), ops});
  }
  if (terms.empty()) throw std::invalid_argument("Pauli text: no terms");
  PauliSum out(terms.front().ops.size());
  for (auto& t : terms) out.add(t.coeff, std::move(t.ops));
  return out;
}

std::string PauliSum::to_text() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

PauliSum PauliSum::from_text(const std::string& text) {
  std::istringstream is(text);
  return read(is);
}

double commutator_norm(const PauliSum& a, const PauliSum& b) {
  const Matrix ma = a.to_dense(), mb = b.to_dense();
  return (ma * mb - mb * ma).norm();
}

}  // namespace tns
