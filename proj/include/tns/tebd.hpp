#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tns/model.hpp"
#include "tns/mpo.hpp"
#include "tns/mps.hpp"
#include "tns/observables.hpp"

namespace tns {

/// exp(-i tau h) for a Hermitian 4x4 bond Hamiltonian.
Gate4 bond_propagator(const Gate4& h, double tau);

struct TebdPlan {
  double dt = 0.25;
  double T = 1.0;
  int order = 2;
  TruncationPolicy policy{150, 1e-8, 0.0};

  /// Number of steps T/dt; throws unless it is an integer to 1e-12 relative.
  std::size_t steps() const;
  void validate() const;
};

struct TebdResult {
  Mps state;
  std::size_t steps = 0;
  /// summed absolute discarded weight over all gate splits
  double discarded_weight = 0.0;
  /// norm just before the final renormalization
  double norm_before_renormalize = 1.0;
};

/// Called after each full step with the step index (1-based) and the time.
using TebdObserver = std::function<void(std::size_t step, double t, const Mps& state)>;

/// Second-order even/odd splitting: exp(-i dt/2 H_even) exp(-i dt H_odd)
/// exp(-i dt/2 H_even) per step, with bond Hamiltonians taken from
/// `bond_h` (bond b couples sites b and b+1).
TebdResult tebd_evolve_bonds(const Mps& s, const std::vector<Gate4>& bond_h, const TebdPlan& plan,
                             const TebdObserver& observer = {});

TebdResult tebd_evolve(const Mps& s, const ModelParams& p, const TebdPlan& plan, const TebdObserver& observer = {});

struct PropagatorMpo {
  double t = 0.0;
  Mpo mpo;
  std::size_t steps = 0;
  double step_size = 0.0;
  std::size_t chi = 0;
  /// Hilbert-Schmidt infidelity between the last two refinements
  double refinement_error = 0.0;
};

class PropagatorError : public std::runtime_error {
 public:
  PropagatorError(const std::string& what, double achieved) : std::runtime_error(what), achieved_error(achieved) {}
  double achieved_error;
};

/// Trotter product MPO for one grid of `steps` second-order steps.
Mpo trotter_mpo(const ModelParams& p, double t, std::size_t steps, const TruncationPolicy& policy,
                double* discarded = nullptr);

/// exp(-iHt) as an MPO. Starts from steps = ceil(t / 0.2) second-order steps
/// and doubles until consecutive refinements agree to `target_error` in
/// normalized Hilbert-Schmidt infidelity. Throws PropagatorError when the
/// bond cap prevents convergence.
PropagatorMpo build_propagator_mpo(const ModelParams& p, double t, double target_error = 1e-8,
                                   std::size_t chi_max = 128);

struct EntropyTimeseries {
  /// Delta S_c(t) on cuts c = 1..N-1 (site column holds the cut index)
  SiteSeries per_cut;
  std::vector<double> times;
  std::vector<double> total;
};

/// Excess entanglement entropy of psi(t) over the vacuum, sampled at t = 0
/// and after every `sample_every` steps.
EntropyTimeseries entropy_timeseries(const Mps& psi0, const Mps& vacuum, const ModelParams& p, const TebdPlan& plan,
                                     std::size_t sample_every = 1);

}  // namespace tns
