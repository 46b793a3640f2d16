#include "tns/wavepacket.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace tns {

std::string to_string(Species s) { return s == Species::Fermion ? "fermion" : "antifermion"; }

void WavePacketSpec::validate() const {
  if (!(sigma_k > 0.0) || !std::isfinite(sigma_k)) throw std::invalid_argument(fmt::format("sigma_k must be positive (got {})", sigma_k));
  if (!std::isfinite(mu_k) || !std::isfinite(mu_n)) throw std::invalid_argument("packet centers must be finite");
}

ScatterScenario default_scenario(const ModelParams& p) {
  p.validate();
  const double dk = 2.0 * std::numbers::pi / static_cast<double>(p.N);
  const double n = static_cast<double>(p.N);
  ScatterScenario sc;
  sc.params = p;
  sc.fermion = {Species::Fermion, 4.0 * dk, n / 4.0, dk};
  sc.antifermion = {Species::Antifermion, -4.0 * dk, 3.0 * n / 4.0 - 1.0, dk};
  return sc;
}

std::vector<cplx> momentum_coeffs(const WavePacketSpec& spec, const ModelParams& p) {
  spec.validate();
  const auto modes = momentum_modes(p);
  std::vector<cplx> phi;
  double norm2 = 0.0;
  for (const auto& mode : modes) {
    const double dk = mode.k - spec.mu_k;
    const cplx c = std::polar(std::exp(-dk * dk / (4.0 * spec.sigma_k * spec.sigma_k)), -mode.k * spec.mu_n);
    norm2 += std::norm(c);
    phi.push_back(c);
  }
  if (!(norm2 > 0.0)) throw std::invalid_argument("wave packet has no weight on the momentum grid");
  for (auto& c : phi) c /= std::sqrt(norm2);
  return phi;
}

std::vector<cplx> packet_position_coeffs(const WavePacketSpec& spec, const ModelParams& p) {
  const auto modes = momentum_modes(p);
  const auto phi = momentum_coeffs(spec, p);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(p.N));
  std::vector<cplx> out(p.N, 0.0);
  for (std::size_t n = 0; n < p.N; ++n) {
    const bool even = n % 2 == 0;
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const auto& mode = modes[j];
      double proj;
      if (spec.species == Species::Fermion) proj = even ? 1.0 : mode.v;
      else proj = even ? mode.v : 1.0;
      out[n] += phi[j] * inv_sqrt_n * mode.amplitude * std::polar(1.0, mode.k * static_cast<double>(n)) * proj;
    }
  }
  return out;
}

Mpo creation_mpo(const std::vector<cplx>& coeffs, Species species) {
  const std::size_t n = coeffs.size();
  if (n == 0) throw std::invalid_argument("creation_mpo: empty coefficient vector");
  bool any = false;
  for (const auto& c : coeffs) any = any || c != cplx(0.0);
  if (!any) throw std::invalid_argument("creation_mpo: coefficients are all zero");

  // sigma^- = |1><0| creates, sigma^+ = |0><1| annihilates
  Gate2 ladder = Gate2::Zero();
  if (species == Species::Fermion) ladder(1, 0) = 1.0;
  else ladder(0, 1) = 1.0;
  Gate2 z;
  z << 1, 0, 0, -1;

  std::vector<Tensor> sites;
  for (std::size_t s = 0; s < n; ++s) {
    Tensor w({2, 2, 2, 2});
    for (std::size_t o = 0; o < 2; ++o)
      for (std::size_t i = 0; i < 2; ++i) {
        w(0, o, i, 0) = z(o, i);
        w(0, o, i, 1) = coeffs[s] * ladder(o, i);
        w(1, o, i, 1) = (o == i) ? 1.0 : 0.0;
      }
    const std::size_t l = (s == 0) ? 1 : 2, r = (s + 1 == n) ? 1 : 2;
    Tensor t({l, 2, 2, r});
    for (std::size_t a = 0; a < l; ++a)
      for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t b = 0; b < r; ++b) t(a, o, i, b) = w(a, o, i, (s + 1 == n) ? 1 : b);
    sites.push_back(std::move(t));
  }
  return Mpo(std::move(sites));
}

InitialState initial_state(const ScatterScenario& sc, const Mps& vacuum, const TruncationPolicy& policy,
                           double max_infidelity) {
  sc.params.validate();
  if (vacuum.size() != sc.params.N) throw std::invalid_argument("initial_state: vacuum size does not match N");
  if (std::abs(vacuum.norm() - 1.0) > 1e-8) throw std::invalid_argument("initial_state: vacuum is not normalized");

  const Mpo c = creation_mpo(packet_position_coeffs(sc.fermion, sc.params), sc.fermion.species);
  const Mpo d = creation_mpo(packet_position_coeffs(sc.antifermion, sc.params), sc.antifermion.species);
  Mps psi = apply_mpo(c, vacuum, policy);
  psi = apply_mpo(d, psi, policy);
  const double nrm = psi.norm();
  if (!(nrm > 1e-12)) throw DegenerateInputError(fmt::format("initial_state: packets annihilate the vacuum (norm {:.3e})", nrm));
  psi.scale(1.0 / nrm);

  InitialState out;
  out.exact = psi;
  std::size_t lo = 1, hi = psi.max_bond();
  CompressionResult best = variational_compress(psi, hi);
  if (best.infidelity >= max_infidelity) {
    throw NumericalError(fmt::format("initial_state: compression at full bond {} leaves infidelity {:.3e}", hi, best.infidelity));
  }
  std::size_t best_chi = hi;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    CompressionResult trial = variational_compress(psi, mid);
    if (trial.infidelity < max_infidelity) {
      hi = mid;
      best = std::move(trial);
      best_chi = mid;
    } else {
      lo = mid + 1;
    }
  }
  best.state.normalize();
  out.state = std::move(best.state);
  out.chi = best_chi;
  out.infidelity = best.infidelity;
  return out;
}

}  // namespace tns
