#pragma once

// Variational compilation of brickwork circuits. A circuit V is fitted either
// to a target state, maximizing |<target| V |0...0>|, or to a target unitary U,
// maximizing |Tr(V^dagger U)|. Both problems are the same overlap between a
// "bra" pulled down through the layers above a gate and a "ket" pushed up
// through the layers below it. In unitary mode the operators are vectorized
// (physical index 2*out + in) and gates act on the out factor only.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tns/circuit.hpp"
#include "tns/mps.hpp"
#include "tns/tebd.hpp"

namespace tns {

enum class CompileMode { State, Unitary };
enum class InitStrategy { Identity, Trotter, Grow };

std::string to_string(CompileMode m);
std::string to_string(InitStrategy s);
CompileMode parse_compile_mode(const std::string& s);
InitStrategy parse_init_strategy(const std::string& s);

struct CompileJob {
  CompileMode mode = CompileMode::State;
  /// state mode target, normalized
  std::optional<Mps> target_state;
  /// unitary mode target
  std::optional<PropagatorMpo> target_unitary;
  std::size_t layers = 2;
  InitStrategy init = InitStrategy::Identity;
  /// Trotter initialization uses these parameters with the target time
  ModelParams params;
  /// Grow initialization starts from this shallower circuit
  std::optional<BrickworkCircuit> grow_from;
  std::size_t max_sweeps = 100;
  /// stop when (C_prev - C) / C_prev falls below this
  double tol = 1e-7;
  /// bond cap of the cached environments; 0 means max(32, 4 x target bond)
  std::size_t env_chi = 0;
  double env_cutoff = 1e-10;
  std::uint64_t seed = 0;
  /// Strength of a seeded random perturbation of the initial gates. Zero
  /// disables it, except that a state-mode start whose overlap is below
  /// `stuck_overlap` (where every environment vanishes and polar updates
  /// cannot move) is perturbed with `stuck_perturbation`.
  double perturbation = 0.0;
  double stuck_overlap = 1e-8;
  double stuck_perturbation = 0.2;
  bool record_gate_deltas = false;

  void validate() const;
};

struct CostReport {
  /// exact cost before the first sweep (index 0) and after each sweep
  std::vector<double> sweep_costs;
  /// change of the cached overlap cost at each gate update (debug)
  std::vector<double> gate_deltas;
  /// summed discarded weight of the environment updates per sweep
  std::vector<double> env_discarded;
  double initial_cost = 1.0;
  double final_cost = 1.0;
  std::size_t sweeps = 0;
  bool converged = false;
  bool perturbed = false;
};

void write_cost_csv(std::ostream& os, const CostReport& r);

struct CompileResult {
  BrickworkCircuit circuit;
  CostReport report;
};

/// Policy used for the fresh cost contractions.
TruncationPolicy exact_cost_policy();

/// 1 - |<target| c |0...0>|^2 / <target|target>
double cost_state(const BrickworkCircuit& c, const Mps& target, const TruncationPolicy& policy = exact_cost_policy());
/// 1 - |Tr(V^dagger U)|^2 / (Tr(V^dagger V) Tr(U^dagger U)), which is
/// 1 - |Tr(V^dagger U)|^2 / 4^N for unitary V and U.
double cost_unitary(const BrickworkCircuit& c, const Mpo& target, const TruncationPolicy& policy = exact_cost_policy());

/// Unitary U maximizing |Tr(E^dagger U)|: U = W X^dagger for E = W S X^dagger.
/// On the null space of a rank-deficient E the unitary closest to `previous`
/// is used, so a zero environment returns `previous` unchanged.
Gate4 polar_update(const Gate4& E, const Gate4& previous = Gate4::Identity());

/// Stateful environment engine for one circuit and one target. Targets are
/// MPS (state mode) or vectorized MPOs (unitary mode).
class CompilerEngine {
 public:
  CompilerEngine(BrickworkCircuit circuit, CompileMode mode, const Mps& target, const TruncationPolicy& env_policy);

  const BrickworkCircuit& circuit() const noexcept { return circuit_; }
  CompileMode mode() const noexcept { return mode_; }

  /// Makes the bra and ket caches current for layer l. Needed before
  /// gate_environment on that layer; costs one pass of layer applications
  /// when the caches are far from l.
  void prepare_layer(std::size_t l);
  std::optional<std::size_t> prepared_layer() const noexcept { return layer_; }

  /// E with overlap = Tr(E^dagger U) for the current gate U. Throws
  /// std::logic_error unless layer l is prepared.
  Gate4 gate_environment(std::size_t l, std::size_t g);
  /// <bra| layer |ket> through the cached side environments.
  cplx cached_overlap();
  /// Replaces a gate of the prepared layer and invalidates dependent caches.
  void update_gate(std::size_t l, std::size_t g, const Gate4& u);

  /// One serpentine sweep: layers bottom to top then top to bottom, gates
  /// left to right then right to left within each layer visit. Returns the
  /// discarded weight of the cache updates.
  double sweep(std::vector<double>* gate_deltas = nullptr);

  /// Cost from the current caches (no fresh contraction).
  double cached_cost();
  /// Fresh contraction of the full network.
  double exact_cost() const;

 private:
  void optimize_layer(std::size_t l, std::vector<double>* deltas);
  void build_blocks();
  Tensor left_env(std::size_t k);
  Tensor right_env(std::size_t k);
  std::size_t block_of_gate(std::size_t g) const;
  double normalization() const;

  BrickworkCircuit circuit_;
  CompileMode mode_;
  Mps target_;
  Mps start_;
  TruncationPolicy env_policy_;
  double target_norm2_ = 1.0;
  double start_norm2_ = 1.0;
  double discarded_ = 0.0;

  // bra_[l] = (layers above l)^dagger target, ket_[l] = (layers below l) start
  std::vector<std::optional<Mps>> bra_, ket_;
  std::optional<std::size_t> layer_;

  struct Block {
    std::size_t first;
    std::size_t width;  // 1 or 2
    std::optional<std::size_t> gate;
  };
  std::vector<Block> blocks_;
  std::vector<std::optional<Tensor>> lenv_, renv_;
};

/// The starting circuit of a job (before any perturbation).
BrickworkCircuit initial_circuit(const CompileJob& job);

CompileResult compile(const CompileJob& job);

}  // namespace tns
