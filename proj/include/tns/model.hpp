#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tns/mpo.hpp"
#include "tns/pauli.hpp"
#include "tns/tensor.hpp"

namespace tns {

/// Lattice Thirring model with open boundaries and lattice spacing 1.
struct ModelParams {
  std::size_t N = 8;
  double m = 0.0;
  double g = 0.0;

  /// Throws std::invalid_argument unless N is even and >= 4, m >= 0 and g >= 0.
  void validate() const;
};

/// H = 1/4 sum (X_n Y_{n+1} - Y_n X_{n+1}) + m/2 sum (-1)^n (1 - Z_n)
///   + g/4 sum (1 - Z_n)(1 - Z_{n+1}).
PauliSum build_hamiltonian_pauli(const ModelParams& p);

/// Finite-state MPO of the same Hamiltonian; bond 5, or 4 when g == 0.
Mpo build_hamiltonian_mpo(const ModelParams& p);

struct MomentumMode {
  double k = 0.0;
  double w = 0.0;
  double v = 0.0;
  /// sqrt((m + w) / w); at m = 0, k = 0 the m -> 0+ limit sqrt(2) is used.
  double amplitude = 0.0;
};

/// N/2 modes on k in (2 pi / N) {-floor(N/4), ..., ceil(N/4) - 1}.
std::vector<MomentumMode> momentum_modes(const ModelParams& p);

/// Local two-site Hamiltonian of bond (b, b+1) in the 2*b_left + b_right basis.
/// Contains the hopping, the full interaction block and the share of the mass
/// terms of both sites: half for interior sites, all of it at chain ends.
Gate4 bond_hamiltonian(const ModelParams& p, std::size_t b);
std::vector<Gate4> bond_hamiltonians(const ModelParams& p);

/// The same bond operator as a Pauli sum on the full chain.
PauliSum bond_hamiltonian_pauli(const ModelParams& p, std::size_t b);

/// H_even collects the bonds (n, n+1) with even n, H_odd the rest.
std::pair<PauliSum, PauliSum> split_even_odd(const ModelParams& p);

/// Fermion number operator xi_n^dagger xi_n = (1 - Z_n) / 2 as a 2x2 matrix.
Gate2 number_operator();

}  // namespace tns
