#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tns/model.hpp"
#include "tns/mpo.hpp"
#include "tns/mps.hpp"

namespace tns {

/// Two-qubit unitary on (site, site + 1). `cnot_cost` is the number of
/// primitive two-qubit gates charged for it (3 for a generic SU(4)).
struct SU4Gate {
  std::size_t site = 0;
  Gate4 u = Gate4::Identity();
  int cnot_cost = 3;
};

/// Even layers hold gates on (0,1), (2,3), ...; odd layers on (1,2), (3,4), ...
/// Free layers allow any disjoint placement.
enum class Parity { Even, Odd, Free };

std::string to_string(Parity p);
Parity parse_parity(const std::string& s);

struct Layer {
  Parity parity = Parity::Even;
  std::vector<SU4Gate> gates;
};

/// Throws std::invalid_argument if `u` is not unitary to `tol` (Frobenius).
void check_unitary(const Gate4& u, double tol = 1e-10);

class BrickworkCircuit {
 public:
  explicit BrickworkCircuit(std::size_t n = 0) : n_(n) {}

  std::size_t num_qubits() const noexcept { return n_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  std::size_t gate_count() const;
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t l) const { return layers_.at(l); }

  /// Validates placement, parity and unitarity before appending.
  void add_layer(Layer layer);
  /// Adds a layer of identity gates on every bond of the given parity.
  void add_identity_layer(Parity parity);
  /// Replaces one gate matrix; the new matrix must be unitary.
  void set_gate(std::size_t l, std::size_t g, const Gate4& u);

  /// Circuit for the inverse unitary: reversed layers, adjoint gates.
  BrickworkCircuit inverse() const;
  /// Appends all layers of `other`.
  void append(const BrickworkCircuit& other);

  void write(std::ostream& os) const;
  static BrickworkCircuit read(std::istream& is);
  void save(const std::string& path) const;
  static BrickworkCircuit load(const std::string& path);

 private:
  void validate_layer(const Layer& layer) const;
  std::size_t n_;
  std::vector<Layer> layers_;
};

bool operator==(const BrickworkCircuit& a, const BrickworkCircuit& b);

/// Haar-random 4x4 unitary (QR of a complex Gaussian matrix with phase fix).
Gate4 random_unitary4(std::mt19937_64& rng);
/// Brickwork of `layers` alternating even/odd layers of Haar-random gates,
/// starting with an even layer.
BrickworkCircuit random_brickwork(std::size_t n, std::size_t layers, std::mt19937_64& rng);

/// Layer of gates exp(-i tau h_b) on all bonds of one parity.
Layer trotter_layer(const ModelParams& p, Parity parity, double tau);

/// Second-order Trotter circuit with merged half steps:
/// E(dt/2) [O(dt) E(dt)]^(S-1) O(dt) E(dt/2), 2S + 1 layers for S = T/dt.
BrickworkCircuit trotter_circuit(const ModelParams& p, double T, double dt);

/// Trotter circuit for a time block that continues an earlier Trotter
/// circuit: [O(dt) E(dt)]^S, whose leading half step merged into the previous
/// block. 2S layers.
BrickworkCircuit trotter_continuation_circuit(const ModelParams& p, double T, double dt);

/// Number of steps T/dt; throws unless integral to 1e-9 relative.
std::size_t integral_steps(double T, double dt);

/// Givens-rotation wave-packet preparation V xi^dagger_0 V^dagger for the
/// fermion and V xi_{N/2} V^dagger for the antifermion, both packets in
/// parallel.
struct WavePacketCircuit {
  std::size_t n = 0;
  /// V^dagger layers, applied first
  BrickworkCircuit undo;
  /// V layers, applied after the pivot operators
  BrickworkCircuit redo;
  std::size_t fermion_pivot = 0;
  std::size_t antifermion_pivot = 0;

  /// undo followed by redo, the unitary part used for resource counts
  BrickworkCircuit unitary_part() const;
  /// Applies the circuit and the pivot operators (with their Jordan-Wigner
  /// strings) to `s`. The result is not renormalized.
  Mps apply(const Mps& s, const TruncationPolicy& policy) const;
};

/// Rotation g with g e_0 = u for a unit vector u, as M-1 adjacent Givens
/// factors; element j acts on modes (j, j+1) as [[a, -conj(b)], [b, conj(a)]].
std::vector<Gate2> givens_factors(const std::vector<cplx>& u);

/// Number-conserving 4x4 gate for a 2x2 single-particle rotation.
Gate4 givens_gate(const Gate2& g);

/// Coefficients are either N/2 long (already restricted to their half) or N
/// long and supported on the first (fermion) and second (antifermion) half.
WavePacketCircuit givens_wavepacket_circuit(const std::vector<cplx>& coeffs_c, const std::vector<cplx>& coeffs_d,
                                            const ModelParams& p);

/// Restricts a length-N coefficient vector to one half of the chain.
std::vector<cplx> restrict_to_half(const std::vector<cplx>& coeffs, bool first_half);

struct ResourceEstimate {
  enum class Provenance { Formula, Counted };
  long long cnot_layers = 0;
  /// undefined when a formula evaluates to a non-integer
  std::optional<long long> cnot_gates;
  Provenance provenance = Provenance::Formula;
};

bool operator==(const ResourceEstimate& a, const ResourceEstimate& b);

ResourceEstimate count_resources(const BrickworkCircuit& c);

/// Givens wave packets: 2N - 4 layers, 4N - 8 gates.
ResourceEstimate wavepacket_formula(std::size_t N);
/// Second-order Trotter: 6S + 3 layers, 3(N-1)S + 3N/2 gates.
ResourceEstimate trotter_formula(std::size_t N, double T, double dt);
/// Continuation block: 6S layers, 3(N-1)S gates.
ResourceEstimate trotter_continuation_formula(std::size_t N, double T, double dt);
/// D_Conv = 2N + 6T/dt - 1 layers and (4N-8) + 3(N-1)T/dt + 3N/2 gates.
/// T/dt may be half-integral; the gate count is then left undefined.
ResourceEstimate conv_depth_formula(std::size_t N, double T, double dt);
/// Brickwork of `layers` full SU(4) layers starting with an even layer.
ResourceEstimate brickwork_formula(std::size_t N, std::size_t layers);

/// Exact gate-by-gate application with truncation.
Mps circuit_apply(const BrickworkCircuit& c, const Mps& s, const TruncationPolicy& policy);
/// The circuit unitary as an MPO, built on the vectorized identity.
Mpo circuit_to_mpo(const BrickworkCircuit& c, const TruncationPolicy& policy);

struct ResourceRow {
  std::string label;
  ResourceEstimate estimate;
};

/// CSV `label,cnot_layers,cnot_gates`; undefined gate counts are left empty.
void write_resource_csv(std::ostream& os, const std::vector<ResourceRow>& rows);

}  // namespace tns
