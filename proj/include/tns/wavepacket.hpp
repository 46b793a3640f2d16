#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tns/model.hpp"
#include "tns/mpo.hpp"
#include "tns/mps.hpp"

namespace tns {

enum class Species { Fermion, Antifermion };

std::string to_string(Species s);

struct WavePacketSpec {
  Species species = Species::Fermion;
  double mu_k = 0.0;
  double mu_n = 0.0;
  double sigma_k = 1.0;

  void validate() const;
};

struct ScatterScenario {
  ModelParams params;
  WavePacketSpec fermion;
  WavePacketSpec antifermion;
};

/// mu_k = +-4 (2 pi / N), sigma_k = 2 pi / N, mu_n = N/4 and 3N/4 - 1.
ScatterScenario default_scenario(const ModelParams& p);

/// phi_k on the momentum grid, normalized to unit l2 norm.
std::vector<cplx> momentum_coeffs(const WavePacketSpec& spec, const ModelParams& p);

/// Position-space coefficients phi~_n of C^dagger = sum phi~_n xi_n^dagger
/// (fermion) or D^dagger = sum phi~_n xi_n (antifermion).
std::vector<cplx> packet_position_coeffs(const WavePacketSpec& spec, const ModelParams& p);

/// Bond-2 MPO sum_n c_n Z...Z s_n, with s = sigma^- for fermions and sigma^+
/// for antifermions.
Mpo creation_mpo(const std::vector<cplx>& coeffs, Species species);

struct InitialState {
  Mps state;
  /// D^dagger C^dagger |Omega>, normalized, uncompressed
  Mps exact;
  std::size_t chi = 0;
  double infidelity = 0.0;
};

/// |psi_0> = D^dagger C^dagger |Omega>, renormalized, then compressed to the
/// smallest bond dimension whose variational fit has infidelity below
/// `max_infidelity`. `policy` truncates the exact MPO applications.
InitialState initial_state(const ScatterScenario& sc, const Mps& vacuum, const TruncationPolicy& policy,
                           double max_infidelity = 1e-6);

}  // namespace tns
