#include "tns/mps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "tns/mpo.hpp"

namespace tns {

Mps::Mps(std::vector<Tensor> sites) : sites_(std::move(sites)) {
  check_shapes();
  spectra_.assign(sites_.empty() ? 0 : sites_.size() - 1, {});
}

void Mps::check_shapes() const {
  if (sites_.empty()) throw std::invalid_argument("MPS needs at least one site");
  for (std::size_t n = 0; n < sites_.size(); ++n) {
    if (sites_[n].rank() != 3) throw std::invalid_argument(fmt::format("MPS site {} is not rank 3", n));
  }
  if (sites_.front().extent(0) != 1 || sites_.back().extent(2) != 1) {
    throw std::invalid_argument("MPS boundary bonds must have dimension 1");
  }
  for (std::size_t n = 0; n + 1 < sites_.size(); ++n) {
    if (sites_[n].extent(2) != sites_[n + 1].extent(0)) {
      throw std::invalid_argument(fmt::format("MPS bond mismatch between sites {} and {}", n, n + 1));
    }
  }
}

Mps Mps::basis_state(std::span<const int> bits) {
  std::vector<std::vector<cplx>> local;
  local.reserve(bits.size());
  for (int b : bits) local.push_back(b ? std::vector<cplx>{0.0, 1.0} : std::vector<cplx>{1.0, 0.0});
  return product_state(local);
}

Mps Mps::product_state(const std::vector<std::vector<cplx>>& local) {
  std::vector<Tensor> sites;
  sites.reserve(local.size());
  for (const auto& v : local) sites.emplace_back(Shape{1, v.size(), 1}, v);
  Mps out(std::move(sites));
  out.center_ = 0;
  return out;
}

Mps Mps::from_dense(std::span<const cplx> psi, std::size_t n, std::size_t d, double cutoff) {
  if (n == 0) throw std::invalid_argument("from_dense: need at least one site");
  const double dim = std::pow(static_cast<double>(d), static_cast<double>(n));
  if (static_cast<double>(psi.size()) != dim) throw std::invalid_argument("from_dense: vector length is not d^n");
  const TruncationPolicy policy{kUnboundedBond, cutoff, 0.0};
  std::vector<Tensor> sites;
  Matrix rest = ConstMatrixMap(psi.data(), 1, static_cast<Eigen::Index>(psi.size()));
  std::size_t left = 1;
  for (std::size_t s = 0; s + 1 < n; ++s) {
    const auto cols = rest.size() / static_cast<Eigen::Index>(left * d);
    Matrix m = Eigen::Map<Matrix>(rest.data(), static_cast<Eigen::Index>(left * d), cols);
    SvdResult svd = truncated_svd(m, policy);
    const std::size_t k = svd.s.size();
    sites.push_back(Tensor::from_matrix(svd.u, {left, d, k}));
    rest = svd.vh;
    for (std::size_t j = 0; j < k; ++j) rest.row(static_cast<Eigen::Index>(j)) *= svd.s[j];
    left = k;
  }
  sites.push_back(Tensor::from_matrix(rest, {left, d, 1}));
  Mps out(std::move(sites));
  out.assume_center(n - 1);
  return out;
}

Mps Mps::random(std::size_t n, std::size_t chi, std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> gauss;
  std::vector<std::size_t> bonds(n + 1, 1);
  for (std::size_t b = 1; b < n; ++b) {
    double left = std::pow(static_cast<double>(d), static_cast<double>(b));
    double right = std::pow(static_cast<double>(d), static_cast<double>(n - b));
    bonds[b] = static_cast<std::size_t>(std::min<double>({static_cast<double>(chi), left, right}));
  }
  std::vector<Tensor> sites;
  for (std::size_t s = 0; s < n; ++s) {
    Tensor t({bonds[s], d, bonds[s + 1]});
    for (auto& x : t.data()) x = cplx(gauss(rng), gauss(rng));
    sites.push_back(std::move(t));
  }
  Mps out(std::move(sites));
  out.canonicalize(0);
  out.normalize();
  return out;
}

std::vector<std::size_t> Mps::bond_dims() const {
  std::vector<std::size_t> out;
  out.reserve(size() + 1);
  out.push_back(sites_.front().extent(0));
  for (const auto& t : sites_) out.push_back(t.extent(2));
  return out;
}

std::size_t Mps::max_bond() const {
  std::size_t m = 1;
  for (const auto& t : sites_) m = std::max(m, t.extent(2));
  return m;
}

void Mps::set_site(std::size_t site, Tensor t) {
  sites_.at(site) = std::move(t);
  center_.reset();
  check_shapes();
}

void Mps::shift_right(std::size_t site) {
  Tensor& a = sites_[site];
  const std::size_t l = a.extent(0), d = a.extent(1);
  Matrix q, r;
  thin_qr(a.matrix(2), q, r);
  const std::size_t k = static_cast<std::size_t>(q.cols());
  a = Tensor::from_matrix(q, {l, d, k});
  Tensor& b = sites_[site + 1];
  const std::size_t d2 = b.extent(1), r2 = b.extent(2);
  Matrix nb = r * b.matrix(1);
  b = Tensor::from_matrix(nb, {k, d2, r2});
  spectra_[site].clear();
}

void Mps::shift_left(std::size_t site) {
  Tensor& a = sites_[site];
  const std::size_t d = a.extent(1), r = a.extent(2);
  Matrix lm, q;
  thin_lq(a.matrix(1), lm, q);
  const std::size_t k = static_cast<std::size_t>(q.rows());
  a = Tensor::from_matrix(q, {k, d, r});
  Tensor& b = sites_[site - 1];
  const std::size_t l2 = b.extent(0), d2 = b.extent(1);
  Matrix nb = b.matrix(2) * lm;
  b = Tensor::from_matrix(nb, {l2, d2, k});
  spectra_[site - 1].clear();
}

void Mps::canonicalize(std::size_t c) {
  if (c >= size()) throw std::out_of_range("canonicalize: center out of range");
  if (center_) {
    while (*center_ < c) {
      shift_right(*center_);
      ++*center_;
    }
    while (*center_ > c) {
      shift_left(*center_);
      --*center_;
    }
    return;
  }
  for (std::size_t s = 0; s < c; ++s) shift_right(s);
  for (std::size_t s = size() - 1; s > c; --s) shift_left(s);
  center_ = c;
}

double Mps::norm() const {
  if (center_) return sites_[*center_].norm();
  return std::sqrt(std::abs(inner(*this, *this)));
}

void Mps::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw DegenerateInputError("cannot normalize a zero-norm MPS");
  scale(1.0 / n);
}

void Mps::scale(cplx factor) {
  const std::size_t s = center_.value_or(0);
  sites_[s] *= factor;
}

bool Mps::finite() const {
  return std::all_of(sites_.begin(), sites_.end(), [](const Tensor& t) { return t.finite(); });
}

double Mps::truncate(const TruncationPolicy& policy) {
  canonicalize(size() - 1);
  double discarded = 0.0;
  for (std::size_t s = size() - 1; s > 0; --s) {
    Tensor& a = sites_[s];
    const std::size_t d = a.extent(1), r = a.extent(2);
    SvdResult svd = truncated_svd(a.matrix(1), policy);
    const std::size_t k = svd.s.size();
    discarded += svd.discarded_weight;
    a = Tensor::from_matrix(svd.vh, {k, d, r});
    Matrix us = svd.u;
    for (std::size_t j = 0; j < k; ++j) us.col(static_cast<Eigen::Index>(j)) *= svd.s[j];
    Tensor& b = sites_[s - 1];
    const std::size_t l2 = b.extent(0), d2 = b.extent(1);
    Matrix nb = b.matrix(2) * us;
    b = Tensor::from_matrix(nb, {l2, d2, k});
    spectra_[s - 1] = std::move(svd.s);
  }
  center_ = 0;
  return discarded;
}

std::vector<cplx> Mps::to_dense() const {
  Matrix acc = Matrix::Ones(1, 1);
  for (const auto& t : sites_) {
    const std::size_t d = t.extent(1), r = t.extent(2);
    Matrix next = acc * t.matrix(1);  // (D, d*r)
    const Eigen::Index rows = acc.rows() * static_cast<Eigen::Index>(d);
    acc = Eigen::Map<Matrix>(next.data(), rows, static_cast<Eigen::Index>(r));
  }
  return {acc.data(), acc.data() + acc.size()};
}

double Mps::apply_two_site(std::size_t site, const Gate4& gate, const TruncationPolicy& policy,
                           bool move_right) {
  if (site + 1 >= size()) throw std::out_of_range("apply_two_site: site out of range");
  if (!center_ || (*center_ != site && *center_ != site + 1)) canonicalize(site);

  const Tensor& a = sites_[site];
  const Tensor& b = sites_[site + 1];
  const std::size_t l = a.extent(0), d1 = a.extent(1), m = a.extent(2);
  const std::size_t d2 = b.extent(1), r = b.extent(2);
  if (d1 % 2 != 0 || d2 % 2 != 0) throw std::invalid_argument("apply_two_site: physical dims must be even");
  const std::size_t aux1 = d1 / 2, aux2 = d2 / 2;

  Matrix theta = a.matrix(2) * b.matrix(1);  // (l*d1, d2*r)
  (void)m;
  cplx* th = theta.data();
  Eigen::Matrix<cplx, 4, 1> v, w;
  for (std::size_t il = 0; il < l; ++il) {
    for (std::size_t x1 = 0; x1 < aux1; ++x1) {
      for (std::size_t x2 = 0; x2 < aux2; ++x2) {
        for (std::size_t ir = 0; ir < r; ++ir) {
          std::size_t idx[4];
          for (std::size_t o1 = 0; o1 < 2; ++o1) {
            for (std::size_t o2 = 0; o2 < 2; ++o2) {
              const std::size_t p1 = o1 * aux1 + x1, p2 = o2 * aux2 + x2;
              idx[o1 * 2 + o2] = ((il * d1 + p1) * d2 + p2) * r + ir;
            }
          }
          for (int k = 0; k < 4; ++k) v(k) = th[idx[k]];
          w.noalias() = gate * v;
          for (int k = 0; k < 4; ++k) th[idx[k]] = w(k);
        }
      }
    }
  }

  SvdResult svd = truncated_svd(theta, policy);
  const std::size_t k = svd.s.size();
  if (move_right) {
    Matrix svh = svd.vh;
    for (std::size_t j = 0; j < k; ++j) svh.row(static_cast<Eigen::Index>(j)) *= svd.s[j];
    sites_[site] = Tensor::from_matrix(svd.u, {l, d1, k});
    sites_[site + 1] = Tensor::from_matrix(svh, {k, d2, r});
    center_ = site + 1;
  } else {
    Matrix us = svd.u;
    for (std::size_t j = 0; j < k; ++j) us.col(static_cast<Eigen::Index>(j)) *= svd.s[j];
    sites_[site] = Tensor::from_matrix(us, {l, d1, k});
    sites_[site + 1] = Tensor::from_matrix(svd.vh, {k, d2, r});
    center_ = site;
  }
  const double absolute = svd.discarded_weight * svd.total_weight;
  spectra_[site] = std::move(svd.s);
  return absolute;
}

void Mps::apply_one_site(std::size_t site, const Matrix& op) {
  Tensor& a = sites_.at(site);
  const std::size_t l = a.extent(0), d = a.extent(1), r = a.extent(2);
  if (static_cast<std::size_t>(op.rows()) != d || static_cast<std::size_t>(op.cols()) != d) {
    throw std::invalid_argument("apply_one_site: operator dimension mismatch");
  }
  Tensor out({l, d, r});
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = 0; q < d; ++q) {
        const cplx c = op(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
        if (c == cplx(0.0)) continue;
        for (std::size_t j = 0; j < r; ++j) out(i, p, j) += c * a(i, q, j);
      }
  a = std::move(out);
  if (center_ != site) center_.reset();
}

cplx inner(const Mps& a, const Mps& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(fmt::format("inner: site count mismatch {} vs {}", a.size(), b.size()));
  }
  Matrix env = Matrix::Ones(1, 1);
  for (std::size_t s = 0; s < a.size(); ++s) {
    const Tensor& ta = a[s];
    const Tensor& tb = b[s];
    if (ta.extent(1) != tb.extent(1)) throw std::invalid_argument("inner: physical dimension mismatch");
    const std::size_t d = tb.extent(1), rb = tb.extent(2);
    Matrix tmp = env * tb.matrix(1);  // (chi_a, d*rb)
    Eigen::Map<Matrix> tmp2(tmp.data(), static_cast<Eigen::Index>(ta.extent(0) * d),
                            static_cast<Eigen::Index>(rb));
    env = ta.matrix(2).adjoint() * tmp2;
  }
  return env(0, 0);
}

double infidelity(const Mps& a, const Mps& b) {
  const double na = std::abs(inner(a, a));
  const double nb = std::abs(inner(b, b));
  return 1.0 - std::norm(inner(a, b)) / (na * nb);
}

Mps apply_mpo(const Mpo& op, const Mps& s, const TruncationPolicy& policy) {
  if (op.size() != s.size()) {
    throw std::invalid_argument(fmt::format("apply_mpo: site count mismatch {} vs {}", op.size(), s.size()));
  }
  std::vector<Tensor> sites;
  sites.reserve(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    const Tensor& w = op[n];
    const Tensor& a = s[n];
    if (w.extent(2) != a.extent(1)) throw std::invalid_argument("apply_mpo: physical dimension mismatch");
    Tensor c = contract(w, {2}, a, {1});  // (wl, o, wr, al, ar)
    Tensor p = c.permuted({0, 3, 1, 2, 4});
    const std::size_t wl = w.extent(0), o = w.extent(1), wr = w.extent(3);
    const std::size_t al = a.extent(0), ar = a.extent(2);
    sites.push_back(std::move(p).reshaped({wl * al, o, wr * ar}));
  }
  Mps out(std::move(sites));
  out.truncate(policy);
  return out;
}

std::vector<double> schmidt_values(const Mps& s, std::size_t cut, CutSide side) {
  if (cut == 0 || cut >= s.size()) throw std::out_of_range("schmidt_values: cut must be in [1, N-1]");
  Mps c = s;
  Matrix m;
  if (side == CutSide::Left) {
    c.canonicalize(cut - 1);
    m = c[cut - 1].matrix(2);
  } else {
    c.canonicalize(cut);
    m = c[cut].matrix(1);
  }
  // eigenvalues of the smaller Gram matrix; avoids Eigen 3.4's unreliable BDCSVD
  using ColMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
  const ColMatrix gram = m.rows() <= m.cols() ? ColMatrix(m * m.adjoint()) : ColMatrix(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<ColMatrix> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("schmidt_values: eigensolver failed");
  const auto& ev = es.eigenvalues();
  std::vector<double> sv;
  for (Eigen::Index k = ev.size(); k-- > 0;) sv.push_back(std::sqrt(std::max(ev(k), 0.0)));
  return sv;
}

double entanglement_entropy(const Mps& s, std::size_t cut, CutSide side) {
  const double n = s.norm();
  if (std::abs(n - 1.0) > 1e-6) {
    throw std::invalid_argument(fmt::format("entanglement_entropy: state norm {} is not 1", n));
  }
  const auto sv = schmidt_values(s, cut, side);
  double total = 0.0;
  for (double x : sv) total += x * x;
  double h = 0.0;
  for (double x : sv) {
    const double p = x * x / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

namespace {

// env' = sum conj(G) env T over (left bond, physical)
Matrix extend_left(const Matrix& env, const Tensor& g, const Tensor& t) {
  const std::size_t d = t.extent(1), rt = t.extent(2);
  Matrix tmp = env * t.matrix(1);
  Eigen::Map<Matrix> tmp2(tmp.data(), static_cast<Eigen::Index>(g.extent(0) * d), static_cast<Eigen::Index>(rt));
  return g.matrix(2).adjoint() * tmp2;
}

// env'[a,b] = sum conj(G[a,p,c]) T[b,p,d] env[c,d]
Matrix extend_right(const Matrix& env, const Tensor& g, const Tensor& t) {
  const std::size_t lt = t.extent(0), d = t.extent(1);
  // T (lt*d, rt) * env^T (rt, cg) -> (lt*d, cg) = X[b,p,c]
  Matrix x = t.matrix(2) * env.transpose();
  Eigen::Map<Matrix> x2(x.data(), static_cast<Eigen::Index>(lt), static_cast<Eigen::Index>(d * g.extent(2)));
  // conj(G) as (lg, d*cg); result[a,b] = sum conj(G)[a,(p,c)] X[b,(p,c)]
  return g.matrix(1).conjugate() * x2.transpose();
}

// optimal site tensor L T R with L (cg, ct), R (cg', ct')
Tensor project_site(const Matrix& left, const Tensor& t, const Matrix& right) {
  const std::size_t lt = t.extent(0), d = t.extent(1), rt = t.extent(2);
  Matrix lt_m = left * t.matrix(1);  // (cg, d*rt)
  Eigen::Map<Matrix> m2(lt_m.data(), static_cast<Eigen::Index>(left.rows() * static_cast<Eigen::Index>(d)),
                        static_cast<Eigen::Index>(rt));
  Matrix out = m2 * right.transpose();  // (cg*d, cg')
  (void)lt;
  return Tensor::from_matrix(out, {static_cast<std::size_t>(left.rows()), d, static_cast<std::size_t>(right.rows())});
}

}  // namespace

CompressionResult variational_compress(const Mps& target, std::size_t chi, double tol, std::size_t max_sweeps) {
  if (chi == 0) throw std::invalid_argument("variational_compress: chi must be positive");
  const std::size_t n = target.size();
  const double target_norm2 = std::abs(inner(target, target));
  if (!(target_norm2 > 0.0)) throw DegenerateInputError("variational_compress: zero target");

  CompressionResult res;
  Mps g = target;
  g.truncate(TruncationPolicy{chi, 1e-15, 0.0});  // center at 0, right-canonical elsewhere

  if (n == 1) {
    res.state = g;
    res.infidelity = infidelity(g, target);
    return res;
  }

  std::vector<Matrix> left(n), right(n);
  left[0] = Matrix::Ones(1, 1);
  right[n - 1] = Matrix::Ones(1, 1);
  for (std::size_t s = n - 1; s > 0; --s) right[s - 1] = extend_right(right[s], g[s], target[s]);

  double prev = 2.0;
  for (std::size_t sweep = 0; sweep < std::max<std::size_t>(max_sweeps, 1); ++sweep) {
    // left to right
    for (std::size_t s = 0; s + 1 < n; ++s) {
      Tensor a = project_site(left[s], target[s], right[s]);
      const std::size_t l = a.extent(0), d = a.extent(1);
      Matrix q, r;
      thin_qr(a.matrix(2), q, r);
      const std::size_t k = static_cast<std::size_t>(q.cols());
      g.site_ref(s) = Tensor::from_matrix(q, {l, d, k});
      const Tensor& nxt = g[s + 1];
      Matrix nb = r * nxt.matrix(1);
      g.site_ref(s + 1) = Tensor::from_matrix(nb, {k, nxt.extent(1), nxt.extent(2)});
      left[s + 1] = extend_left(left[s], g[s], target[s]);
    }
    // right to left
    for (std::size_t s = n - 1; s > 0; --s) {
      Tensor a = project_site(left[s], target[s], right[s]);
      const std::size_t d = a.extent(1), r = a.extent(2);
      Matrix lm, q;
      thin_lq(a.matrix(1), lm, q);
      const std::size_t k = static_cast<std::size_t>(q.rows());
      g.site_ref(s) = Tensor::from_matrix(q, {k, d, r});
      const Tensor& prv = g[s - 1];
      Matrix nb = prv.matrix(2) * lm;
      g.site_ref(s - 1) = Tensor::from_matrix(nb, {prv.extent(0), prv.extent(1), k});
      right[s - 1] = extend_right(right[s], g[s], target[s]);
    }
    Tensor a0 = project_site(left[0], target[0], right[0]);
    g.site_ref(0) = a0;
    g.assume_center(0);
    const double fid = a0.norm() * a0.norm() / target_norm2;
    const double inf = std::max(0.0, 1.0 - fid);
    res.sweeps = sweep + 1;
    res.infidelity = inf;
    if (prev - inf < tol) break;
    prev = inf;
  }
  res.state = std::move(g);
  return res;
}

}  // namespace tns
