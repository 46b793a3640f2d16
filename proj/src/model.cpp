#include "tns/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace tns {

void ModelParams::validate() const {
  if (N < 4 || N % 2 != 0) throw std::invalid_argument(fmt::format("N must be even and at least 4 (got {})", N));
  if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument(fmt::format("mass must be finite and nonnegative (got {})", m));
  if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument(fmt::format("coupling must be finite and nonnegative (got {})", g));
}

namespace {

double stagger(std::size_t n) { return (n % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

PauliSum build_hamiltonian_pauli(const ModelParams& p) {
  p.validate();
  const std::size_t n = p.N;
  PauliSum h(n);
  double identity = 0.0;
  for (std::size_t b = 0; b + 1 < n; ++b) {
    h.add(0.25, {{b, 'X'}, {b + 1, 'Y'}});
    h.add(-0.25, {{b, 'Y'}, {b + 1, 'X'}});
  }
  for (std::size_t s = 0; s < n; ++s) {
    const double c = 0.5 * p.m * stagger(s);
    identity += c;
    if (c != 0.0) h.add(-c, {{s, 'Z'}});
  }
  if (p.g != 0.0) {
    const double q = 0.25 * p.g;
    for (std::size_t b = 0; b + 1 < n; ++b) {
      identity += q;
      h.add(-q, {{b, 'Z'}});
      h.add(-q, {{b + 1, 'Z'}});
      h.add(q, {{b, 'Z'}, {b + 1, 'Z'}});
    }
  }
  if (identity != 0.0) h.add(identity, std::string(n, 'I'));
  return h.simplified();
}

Mpo build_hamiltonian_mpo(const ModelParams& p) {
  p.validate();
  const std::size_t n = p.N;
  const bool interacting = p.g != 0.0;
  // channels: 0 start, 1 after X, 2 after Y, [3 after Z], last = done
  const std::size_t chi = interacting ? 5 : 4;
  const std::size_t done = chi - 1;
  const Gate2 I = pauli_matrix('I'), X = pauli_matrix('X'), Y = pauli_matrix('Y'), Z = pauli_matrix('Z');

  std::vector<Tensor> sites;
  for (std::size_t s = 0; s < n; ++s) {
    const double bonds = (s > 0 ? 1.0 : 0.0) + (s + 1 < n ? 1.0 : 0.0);
    const double cz = -0.5 * p.m * stagger(s) - 0.25 * p.g * bonds;
    const double cid = 0.5 * p.m * stagger(s) + (s + 1 < n ? 0.25 * p.g : 0.0);
    const Gate2 onsite = cz * Z + cid * I;

    Tensor w({chi, 2, 2, chi});
    auto put = [&](std::size_t a, std::size_t b, const Gate2& op) {
      for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 2; ++i) w(a, o, i, b) += op(o, i);
    };
    put(0, 0, I);
    put(0, 1, X);
    put(0, 2, Y);
    put(1, done, 0.25 * Y);
    put(2, done, -0.25 * X);
    if (interacting) {
      put(0, 3, Z);
      put(3, done, 0.25 * p.g * Z);
    }
    put(0, done, onsite);
    put(done, done, I);

    // boundary vectors: first site keeps row 0, last site keeps column `done`
    const std::size_t l = (s == 0) ? 1 : chi, r = (s + 1 == n) ? 1 : chi;
    Tensor t({l, 2, 2, r});
    for (std::size_t a = 0; a < l; ++a)
      for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t b = 0; b < r; ++b) t(a, o, i, b) = w(a, o, i, (s + 1 == n) ? done : b);
    sites.push_back(std::move(t));
  }
  return Mpo(std::move(sites));
}

std::vector<MomentumMode> momentum_modes(const ModelParams& p) {
  p.validate();
  const long n = static_cast<long>(p.N);
  const long lo = -(n / 4);
  const long hi = (n + 3) / 4 - 1;  // ceil(N/4) - 1
  std::vector<MomentumMode> modes;
  for (long j = lo; j <= hi; ++j) {
    MomentumMode mode;
    mode.k = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    const double s = std::sin(mode.k);
    mode.w = std::sqrt(p.m * p.m + s * s);
    if (p.m + mode.w == 0.0) {
      mode.v = 0.0;
      mode.amplitude = std::sqrt(2.0);
    } else {
      mode.v = s / (p.m + mode.w);
      mode.amplitude = std::sqrt((p.m + mode.w) / mode.w);
    }
    modes.push_back(mode);
  }
  return modes;
}

PauliSum bond_hamiltonian_pauli(const ModelParams& p, std::size_t b) {
  p.validate();
  const std::size_t n = p.N;
  if (b + 1 >= n) throw std::out_of_range("bond index out of range");
  PauliSum h(n);
  h.add(0.25, {{b, 'X'}, {b + 1, 'Y'}});
  h.add(-0.25, {{b, 'Y'}, {b + 1, 'X'}});
  double identity = 0.0;
  for (std::size_t s : {b, b + 1}) {
    const double share = (s == 0 || s + 1 == n) ? 1.0 : 0.5;
    const double c = share * 0.5 * p.m * stagger(s);
    identity += c;
    if (c != 0.0) h.add(-c, {{s, 'Z'}});
  }
  if (p.g != 0.0) {
    const double q = 0.25 * p.g;
    identity += q;
    h.add(-q, {{b, 'Z'}});
    h.add(-q, {{b + 1, 'Z'}});
    h.add(q, {{b, 'Z'}, {b + 1, 'Z'}});
  }
  if (identity != 0.0) h.add(identity, std::string(n, 'I'));
  return h.simplified();
}

Gate4 bond_hamiltonian(const ModelParams& p, std::size_t b) {
  const PauliSum full = bond_hamiltonian_pauli(p, b);
  PauliSum local(2);
  for (const auto& t : full.terms()) local.add(t.coeff, t.ops.substr(b, 2));
  return Gate4(local.to_dense());
}

std::vector<Gate4> bond_hamiltonians(const ModelParams& p) {
  std::vector<Gate4> out;
  for (std::size_t b = 0; b + 1 < p.N; ++b) out.push_back(bond_hamiltonian(p, b));
  return out;
}

std::pair<PauliSum, PauliSum> split_even_odd(const ModelParams& p) {
  PauliSum even(p.N), odd(p.N);
  for (std::size_t b = 0; b + 1 < p.N; ++b) (b % 2 == 0 ? even : odd) += bond_hamiltonian_pauli(p, b);
  return {even.simplified(), odd.simplified()};
}

Gate2 number_operator() {
  Gate2 n;
  n << 0, 0, 0, 1;
  return n;
}

}  // namespace tns
