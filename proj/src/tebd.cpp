#include "tns/tebd.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace tns {

Gate4 bond_propagator(const Gate4& h, double tau) {
  const Eigen::Matrix4cd hm = h;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(hm);
  Eigen::Vector4cd phases;
  for (int k = 0; k < 4; ++k) phases(k) = std::polar(1.0, -tau * es.eigenvalues()(k));
  return Gate4(es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint());
}

std::size_t TebdPlan::steps() const {
  const double ratio = T / dt;
  const double r = std::round(ratio);
  if (std::abs(ratio - r) > 1e-12 * std::max(1.0, std::abs(ratio))) {
    throw std::invalid_argument(fmt::format("T = {} is not an integer multiple of dt = {}", T, dt));
  }
  return static_cast<std::size_t>(r);
}

void TebdPlan::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("TEBD dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("TEBD total time must be nonnegative");
  if (order != 2) throw std::invalid_argument("only second-order TEBD is implemented");
  policy.validate();
  (void)steps();
}

namespace {

/// Applies gates[b] on every bond b of the given parity, sweeping in the
/// direction that follows the current orthogonality center.
double apply_layer(Mps& s, const std::vector<Gate4>& gates, std::size_t parity, bool left_to_right,
                   const TruncationPolicy& policy) {
  const std::size_t nb = gates.size();
  std::vector<std::size_t> bonds;
  for (std::size_t b = parity; b < nb; b += 2) bonds.push_back(b);
  if (!left_to_right) std::reverse(bonds.begin(), bonds.end());
  double w = 0.0;
  for (std::size_t b : bonds) w += s.apply_two_site(b, gates[b], policy, left_to_right);
  return w;
}

std::vector<Gate4> propagators(const std::vector<Gate4>& bond_h, double tau) {
  std::vector<Gate4> out;
  out.reserve(bond_h.size());
  for (const auto& h : bond_h) out.push_back(bond_propagator(h, tau));
  return out;
}

}  // namespace

TebdResult tebd_evolve_bonds(const Mps& s, const std::vector<Gate4>& bond_h, const TebdPlan& plan,
                             const TebdObserver& observer) {
  plan.validate();
  if (bond_h.size() + 1 != s.size()) throw std::invalid_argument("tebd: need one bond Hamiltonian per bond");
  if (const double nrm = s.norm(); std::abs(nrm - 1.0) > 1e-8)
    throw std::invalid_argument(fmt::format("tebd: input state has norm {}, expected 1", nrm));
  const std::size_t steps = plan.steps();
  const auto half = propagators(bond_h, 0.5 * plan.dt);
  const auto full = propagators(bond_h, plan.dt);

  TebdResult res;
  res.state = s;
  Mps& psi = res.state;
  bool ltr = true;
  for (std::size_t k = 0; k < steps; ++k) {
    res.discarded_weight += apply_layer(psi, half, 0, ltr, plan.policy);
    ltr = !ltr;
    res.discarded_weight += apply_layer(psi, full, 1, ltr, plan.policy);
    ltr = !ltr;
    res.discarded_weight += apply_layer(psi, half, 0, ltr, plan.policy);
    ltr = !ltr;
    if (!psi.finite()) throw NumericalError(fmt::format("tebd: non-finite state after step {}", k + 1));
    if (observer) observer(k + 1, static_cast<double>(k + 1) * plan.dt, psi);
  }
  res.steps = steps;
  res.norm_before_renormalize = psi.norm();
  psi.normalize();
  return res;
}

TebdResult tebd_evolve(const Mps& s, const ModelParams& p, const TebdPlan& plan, const TebdObserver& observer) {
  if (s.size() != p.N) throw std::invalid_argument("tebd: state size does not match N");
  return tebd_evolve_bonds(s, bond_hamiltonians(p), plan, observer);
}

Mpo trotter_mpo(const ModelParams& p, double t, std::size_t steps, const TruncationPolicy& policy, double* discarded) {
  if (steps == 0) throw std::invalid_argument("trotter_mpo: need at least one step");
  const auto bond_h = bond_hamiltonians(p);
  const double dt = t / static_cast<double>(steps);
  const auto half = propagators(bond_h, 0.5 * dt);
  const auto full = propagators(bond_h, dt);

  Mps v = Mpo::identity(p.N).vectorize();
  v.canonicalize(0);
  double w = 0.0;
  bool ltr = true;
  auto layer = [&](const std::vector<Gate4>& gates, std::size_t parity) {
    w += apply_layer(v, gates, parity, ltr, policy);
    ltr = !ltr;
  };
  layer(half, 0);
  for (std::size_t k = 0; k + 1 < steps; ++k) {
    layer(full, 1);
    layer(full, 0);
  }
  layer(full, 1);
  layer(half, 0);
  // restore the Frobenius norm of a unitary, sqrt(2^N)
  v.scale(std::sqrt(std::pow(2.0, static_cast<double>(p.N))) / v.norm());
  if (discarded) *discarded = w;
  return Mpo::devectorize(v);
}

PropagatorMpo build_propagator_mpo(const ModelParams& p, double t, double target_error, std::size_t chi_max) {
  p.validate();
  if (!(t > 0.0)) throw std::invalid_argument("build_propagator_mpo: t must be positive");
  if (!(target_error > 0.0)) throw std::invalid_argument("build_propagator_mpo: target_error must be positive");
  const TruncationPolicy policy{chi_max, 1e-10, 0.0};
  constexpr std::size_t kMaxSteps = 1u << 14;

  std::size_t steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t / 0.2)));
  Mpo prev = trotter_mpo(p, t, steps, policy);
  double last_err = std::numeric_limits<double>::infinity();
  while (true) {
    const std::size_t next = 2 * steps;
    Mpo cur = trotter_mpo(p, t, next, policy);
    const double err = std::max(0.0, hs_infidelity(prev, cur));
    if (err < target_error) {
      PropagatorMpo out;
      out.t = t;
      out.mpo = std::move(cur);
      out.steps = next;
      out.step_size = t / static_cast<double>(next);
      out.chi = out.mpo.max_bond();
      out.refinement_error = err;
      return out;
    }
    if (err >= last_err || next >= kMaxSteps) {
      throw PropagatorError(
          fmt::format("propagator did not converge: refinement error {:.3e} at {} steps with chi_max {} (target {:.1e})",
                      err, next, chi_max, target_error),
          err);
    }
    last_err = err;
    prev = std::move(cur);
    steps = next;
  }
}

EntropyTimeseries entropy_timeseries(const Mps& psi0, const Mps& vacuum, const ModelParams& p, const TebdPlan& plan,
                                     std::size_t sample_every) {
  if (sample_every == 0) throw std::invalid_argument("entropy_timeseries: sample_every must be positive");
  const std::size_t n = p.N;
  std::vector<double> base(n - 1);
  for (std::size_t c = 1; c < n; ++c) base[c - 1] = entanglement_entropy(vacuum, c);

  EntropyTimeseries out;
  out.per_cut.label = "delta_entropy";
  out.per_cut.parity_column = false;
  for (std::size_t c = 1; c < n; ++c) out.per_cut.sites.push_back(c);

  auto sample = [&](double t, const Mps& s) {
    Mps u = s;
    u.normalize();
    std::vector<double> row(n - 1);
    double total = 0.0;
    for (std::size_t c = 1; c < n; ++c) {
      row[c - 1] = entanglement_entropy(u, c) - base[c - 1];
      total += row[c - 1];
    }
    out.per_cut.append(t, std::move(row));
    out.times.push_back(t);
    out.total.push_back(total);
  };
  sample(0.0, psi0);
  tebd_evolve(psi0, p, plan, [&](std::size_t step, double t, const Mps& s) {
    if (step % sample_every == 0) sample(t, s);
  });
  return out;
}

}  // namespace tns
