#include "tns/dmrg.hpp"

#include <cmath>
#include <stdexcept>

#include "tns/environment.hpp"

namespace tns {

Mps neel_state(std::size_t n) {
  std::vector<int> bits(n);
  for (std::size_t s = 0; s < n; ++s) bits[s] = static_cast<int>(s % 2);
  return Mps::basis_state(bits);
}

namespace {

struct TwoSite {
  const Tensor& left;
  const Tensor& w1;
  const Tensor& w2;
  const Tensor& right;
  Shape shape;  // (l, d1, d2, r)

  Eigen::VectorXcd operator()(const Eigen::Ref<const Eigen::VectorXcd>& x) const {
    Tensor theta(shape, std::vector<cplx>(x.data(), x.data() + x.size()));
    Tensor a = contract(left, {2}, theta, {0});   // (a, w, t1, t2, b')
    Tensor b = contract(a, {1, 2}, w1, {0, 2});   // (a, t2, b', s1, w')
    Tensor c = contract(b, {4, 1}, w2, {0, 2});   // (a, b', s1, s2, w'')
    Tensor out = contract(c, {1, 4}, right, {2, 1});  // (a, s1, s2, b)
    return Eigen::Map<const Eigen::VectorXcd>(out.data().data(), static_cast<Eigen::Index>(out.size()));
  }
};

}  // namespace

DmrgResult dmrg_ground_state(const Mpo& h, const DmrgOptions& opt, std::optional<Mps> initial) {
  const std::size_t n = h.size();
  if (n < 2) throw std::invalid_argument("dmrg: need at least two sites");
  Mps psi = initial ? std::move(*initial) : neel_state(n);
  if (psi.size() != n) throw std::invalid_argument("dmrg: initial state size mismatch");
  psi.canonicalize(0);
  psi.normalize();

  const TruncationPolicy policy{opt.chi_max, opt.svd_cutoff, opt.absolute_floor, opt.discarded_weight};
  policy.validate();

  std::vector<Tensor> lenv(n + 1), renv(n + 1);
  lenv[0] = trivial_environment();
  renv[n] = trivial_environment();
  for (std::size_t s = n; s-- > 1;) renv[s] = grow_right(renv[s + 1], psi[s], h[s], psi[s]);

  DmrgResult res;
  double best = std::numeric_limits<double>::infinity();
  double energy = 0.0;

  auto optimize = [&](std::size_t i, bool move_right) {
    const Tensor& a = psi[i];
    const Tensor& b = psi[i + 1];
    const std::size_t l = a.extent(0), d1 = a.extent(1), d2 = b.extent(1), r = b.extent(2);
    Matrix theta_m = a.matrix(2) * b.matrix(1);
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(theta_m.data(), theta_m.size());
    TwoSite op{lenv[i], h[i], h[i + 1], renv[i + 2], {l, d1, d2, r}};
    energy = lanczos_ground(op, v, opt.krylov_dim, opt.lanczos_tol);

    Eigen::Map<const Matrix> theta(v.data(), static_cast<Eigen::Index>(l * d1), static_cast<Eigen::Index>(d2 * r));
    SvdResult svd = truncated_svd(theta, policy);
    const std::size_t k = svd.s.size();
    double norm2 = 0.0;
    for (double s : svd.s) norm2 += s * s;
    for (double& s : svd.s) s /= std::sqrt(norm2);
    if (move_right) {
      Matrix svh = svd.vh;
      for (std::size_t j = 0; j < k; ++j) svh.row(static_cast<Eigen::Index>(j)) *= svd.s[j];
      psi.site_ref(i) = Tensor::from_matrix(svd.u, {l, d1, k});
      psi.site_ref(i + 1) = Tensor::from_matrix(svh, {k, d2, r});
      psi.assume_center(i + 1);
      lenv[i + 1] = grow_left(lenv[i], psi[i], h[i], psi[i]);
    } else {
      Matrix us = svd.u;
      for (std::size_t j = 0; j < k; ++j) us.col(static_cast<Eigen::Index>(j)) *= svd.s[j];
      psi.site_ref(i) = Tensor::from_matrix(us, {l, d1, k});
      psi.site_ref(i + 1) = Tensor::from_matrix(svd.vh, {k, d2, r});
      psi.assume_center(i);
      renv[i + 1] = grow_right(renv[i + 2], psi[i + 1], h[i + 1], psi[i + 1]);
    }
    psi.record_spectrum(i, std::move(svd.s));
  };

  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    for (std::size_t i = 0; i + 1 < n; ++i) optimize(i, true);
    for (std::size_t i = n - 1; i-- > 0;) optimize(i, false);
    res.sweeps = sweep + 1;
    const double prev = res.sweep_energies.empty() ? std::numeric_limits<double>::infinity() : res.sweep_energies.back();
    res.sweep_energies.push_back(energy);
    if (energy > prev + 1e-10 * std::max(1.0, std::abs(prev))) res.nonmonotone = true;
    if (energy < best) {
      best = energy;
      res.state = psi;
      res.energy = energy;
    }
    if (std::abs(prev - energy) < opt.energy_tol) {
      res.converged = true;
      break;
    }
  }
  res.state.normalize();
  return res;
}

}  // namespace tns
