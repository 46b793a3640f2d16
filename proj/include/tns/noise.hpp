#pragma once

// Noise amplification and mitigation: digital gate folding, stochastic
// two-qubit Pauli trajectories, exponential zero-noise extrapolation and
// CP-symmetry averaging of site profiles.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tns/circuit.hpp"
#include "tns/mps.hpp"

namespace tns {

struct NoiseModel {
  /// depolarizing probability applied after every two-qubit gate
  double two_qubit_depol_p = 4e-3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FoldedCircuit {
  /// realized circuit; gate U with k folds becomes U, (U^dagger, U) x k
  BrickworkCircuit circuit;
  double noise_factor = 1.0;
  std::size_t base_gates = 0;
  std::size_t realized_gates = 0;
  /// folds[l][g]: fold count of gate g of base layer l
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;
};

/// Folds every gate floor((G-1)/2) times and a seeded random subset once
/// more, so that the realized gate count is base + 2 round((G-1) base / 2).
/// Throws std::invalid_argument for G < 1.
FoldedCircuit fold(const BrickworkCircuit& c, double G, std::uint64_t seed);

enum class SimBackend { Auto, Dense, Mps };

std::string to_string(SimBackend b);

struct SimulationOptions {
  std::size_t trajectories = 1000;
  SimBackend backend = SimBackend::Auto;
  /// Auto uses state vectors up to this many qubits
  std::size_t dense_max_qubits = 14;
  /// truncation of the MPS backend
  TruncationPolicy policy{256, 1e-12, 0.0};
};

struct Estimate {
  double mean = 0.0;
  double err = 0.0;
};

struct NoisyResult {
  std::vector<std::size_t> sites;
  /// <Z_site> per requested site
  std::vector<Estimate> z;
  std::size_t trajectories = 0;
  /// trajectories in which no error was drawn
  std::size_t error_free = 0;
  /// distinct error patterns that had to be simulated
  std::size_t distinct_patterns = 0;
  SimBackend backend = SimBackend::Auto;
};

/// Trajectory t draws its errors from a generator seeded by (noise.seed, t):
/// after each two-qubit gate, with probability p, one of the 15 non-identity
/// two-qubit Paulis uniformly. The error is merged into the gate it follows,
/// so every trajectory is an ordinary circuit. Identical error patterns are
/// simulated once; the state vector backend also restarts from the cached
/// noiseless state before the first faulty layer. With p = 0 the MPS
/// backend returns measure_z(circuit_apply(c, initial, policy)) exactly.
NoisyResult simulate_noisy(const BrickworkCircuit& c, const Mps& initial, const NoiseModel& noise,
                           const SimulationOptions& opt, std::vector<std::size_t> sites = {});

/// Seed of trajectory `index` under the top-level `seed`.
std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t index);

enum class ZneModel { Exp3, Exp2, LogLinear };

std::string to_string(ZneModel m);
ZneModel parse_zne_model(const std::string& s);

struct ZnePoint {
  double G = 1.0;
  double mean = 0.0;
  double err = 0.0;
};

struct ZneOptions {
  ZneModel model = ZneModel::Exp3;
  std::size_t resamples = 500;
  std::uint64_t seed = 0;
};

struct ZneRun {
  std::string observable;
  ZneModel model = ZneModel::Exp3;
  /// noise factors used by the fit
  std::vector<double> subset;
  std::vector<ZnePoint> points;
  /// exp3: (a, b, c); exp2: (a, b); loglinear: (alpha, beta) of log|y| = alpha + beta G
  std::vector<double> params;
  double value = 0.0;
  double uncertainty = 0.0;
  /// weighted residuals (y - f) / stderr, or plain residuals without stderrs
  std::vector<double> residuals;
  double chi2 = 0.0;
  /// decay rate ended on the edge of the search interval
  bool at_bound = false;
  std::size_t resamples = 0;
  std::size_t failed_resamples = 0;
};

class ZneFitError : public std::runtime_error {
 public:
  ZneFitError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals(std::move(residuals)) {}
  std::vector<double> residuals;
};

/// Weighted least squares with 1/stderr^2 weights (unit weights when all
/// stderrs are zero), extrapolated to G = 0, with a parametric bootstrap for
/// the uncertainty. `subset` selects noise factors; empty means all points.
ZneRun zne_fit(const std::vector<ZnePoint>& points, const ZneOptions& opt, const std::vector<double>& subset = {},
               const std::string& observable = "");

/// {1,2,3,4,5}, {1,2,3,4} and {1,3,5}
const std::vector<std::vector<double>>& standard_zne_subsets();

std::vector<ZneRun> zne_subset_study(const std::vector<ZnePoint>& points, const ZneOptions& opt,
                                     const std::vector<std::vector<double>>& subsets, const std::string& observable = "");

struct ObservablePoints {
  std::string observable;
  std::vector<ZnePoint> points;
};

/// CSV `observable,G,mean,stderr`.
void write_zne_csv(std::ostream& os, const std::vector<ObservablePoints>& data);
std::vector<ObservablePoints> read_zne_csv(std::istream& is);
/// JSON summary of fits, with the top-level seed that produced the data.
std::string zne_summary_json(const std::vector<ZneRun>& runs, std::uint64_t seed);

/// out[n] = (in[n] + s in[N-1-n]) / 2 with partner sign s; errors (if given)
/// combine in quadrature and are halved. In this model's conventions CP maps
/// <Z_n> to -<Z_{N-1-n}> (and likewise the vacuum-subtracted density), so
/// such profiles are averaged with s = -1.
std::vector<double> cp_average(const std::vector<double>& values, double partner_sign = 1.0);
std::vector<Estimate> cp_average(const std::vector<Estimate>& values, double partner_sign = 1.0);

/// Delta <xi^dagger xi>_n = (1 - <Z_n>)/2 minus the vacuum value.
std::vector<double> fermion_density(const std::vector<double>& z, const std::vector<double>& vacuum_z);
std::vector<double> fermion_density(const Mps& psi, const Mps& vacuum);

}  // namespace tns
