#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tns/mpo.hpp"
#include "tns/mps.hpp"

namespace tns {

struct DmrgOptions {
  std::size_t chi_max = 32;
  std::size_t max_sweeps = 30;
  double energy_tol = 1e-10;
  /// relative singular-value cutoff for the two-site splits
  double svd_cutoff = 1e-12;
  double absolute_floor = 1e-12;
  /// bound on the relative discarded weight per split; 0 disables
  double discarded_weight = 0.0;
  std::size_t krylov_dim = 24;
  double lanczos_tol = 1e-12;
};

struct DmrgResult {
  Mps state;
  double energy = 0.0;
  /// energy at the end of each sweep
  std::vector<double> sweep_energies;
  std::size_t sweeps = 0;
  bool converged = false;
  /// set when the energy rose between sweeps by more than roundoff
  bool nonmonotone = false;
};

/// Two-site DMRG. Starts from `initial` or, if absent, from the staggered
/// half-filled product state with odd sites occupied. The returned state is
/// normalized with its orthogonality center at site 0. When the energy does
/// not converge within max_sweeps the best state is returned with
/// converged = false.
DmrgResult dmrg_ground_state(const Mpo& h, const DmrgOptions& opt, std::optional<Mps> initial = std::nullopt);

/// Staggered product state |0101...>.
Mps neel_state(std::size_t n);

/// Lowest eigenpair of a Hermitian linear map via restarted Lanczos with full
/// reorthogonalization. `v` is the start vector on input and the eigenvector
/// on output.
template <class Apply>
double lanczos_ground(Apply&& apply, Eigen::VectorXcd& v, std::size_t krylov_dim, double tol, std::size_t restarts = 8);

}  // namespace tns

#include "tns/detail/lanczos.hpp"
