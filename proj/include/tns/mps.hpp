#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tns/svd.hpp"
#include "tns/tensor.hpp"

namespace tns {

class Mpo;

/// Open-boundary matrix product state. Site tensors have shape
/// (chi_left, d, chi_right); the boundary bonds have dimension 1.
///
/// The physical dimension is usually 2. Vectorized operators are stored as
/// MPS with d = 4 (index = 2*out + in), and gates act on the leading factor
/// of 2 in the physical index, so the same routines serve both.
class Mps {
 public:
  Mps() = default;
  explicit Mps(std::vector<Tensor> sites);

  /// Computational basis state |b_0 b_1 ...>.
  static Mps basis_state(std::span<const int> bits);
  /// Product of the given single-site vectors (each of length d).
  static Mps product_state(const std::vector<std::vector<cplx>>& local);
  /// Exact MPS of a dense state vector (site 0 most significant) by
  /// successive SVDs; singular values below `cutoff` (relative) are dropped.
  static Mps from_dense(std::span<const cplx> psi, std::size_t n, std::size_t d = 2, double cutoff = 1e-14);
  /// Random state with uniform bond `chi` (capped by the Hilbert space), normalized.
  static Mps random(std::size_t n, std::size_t chi, std::mt19937_64& rng, std::size_t d = 2);

  std::size_t size() const noexcept { return sites_.size(); }
  std::size_t phys_dim(std::size_t site) const { return sites_.at(site).extent(1); }
  /// Dimension of the bond between `b` and `b + 1`.
  std::size_t bond(std::size_t b) const { return sites_.at(b).extent(2); }
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond() const;

  const Tensor& operator[](std::size_t site) const { return sites_.at(site); }
  const std::vector<Tensor>& sites() const noexcept { return sites_; }
  /// Replaces a site tensor. Any orthogonality center is forgotten.
  void set_site(std::size_t site, Tensor t);

  std::optional<std::size_t> center() const noexcept { return center_; }
  /// Brings the state into mixed-canonical form around `c`. Incremental when
  /// a center is already known.
  void canonicalize(std::size_t c);

  double norm() const;
  void normalize();
  void scale(cplx factor);

  /// Singular values of bond `b`, recorded by the last SVD touching it.
  const std::vector<double>& bond_spectrum(std::size_t b) const { return spectra_.at(b); }

  /// SVD compression sweep; returns the summed relative discarded weight.
  double truncate(const TruncationPolicy& policy);

  std::vector<cplx> to_dense() const;
  bool finite() const;

  /// Applies a two-site gate to (site, site+1), acting on the leading factor 2
  /// of the physical index. Moves the center to `site` first and leaves it at
  /// `site + 1` (move_right) or `site`. Returns the absolute discarded weight.
  double apply_two_site(std::size_t site, const Gate4& gate, const TruncationPolicy& policy,
                        bool move_right = true);
  /// Applies a one-site operator (d x d) on the full physical index.
  void apply_one_site(std::size_t site, const Matrix& op);

  // internal mutation used by algorithms that maintain the gauge themselves
  Tensor& site_ref(std::size_t site) { return sites_.at(site); }
  void assume_center(std::optional<std::size_t> c) { center_ = c; }
  void record_spectrum(std::size_t b, std::vector<double> s) { spectra_.at(b) = std::move(s); }

 private:
  void check_shapes() const;
  void shift_right(std::size_t site);
  void shift_left(std::size_t site);

  std::vector<Tensor> sites_;
  std::optional<std::size_t> center_;
  std::vector<std::vector<double>> spectra_;
};

/// <a|b>, contracted left to right with transfer matrices.
cplx inner(const Mps& a, const Mps& b);

/// op|s>, exact contraction followed by an SVD compression sweep.
Mps apply_mpo(const Mpo& op, const Mps& s, const TruncationPolicy& policy);

enum class CutSide { Left, Right };

/// Schmidt values across the cut between sites cut-1 and cut, computed from
/// the SVD of the center tensor placed on the given side of the cut.
std::vector<double> schmidt_values(const Mps& s, std::size_t cut, CutSide side = CutSide::Left);

/// von Neumann entropy in bits across the cut between sites cut-1 and cut.
double entanglement_entropy(const Mps& s, std::size_t cut, CutSide side = CutSide::Left);

struct CompressionResult {
  Mps state;
  double infidelity = 1.0;
  std::size_t sweeps = 0;
};

/// Variational fit of a bond-`chi` MPS to `target` by alternating one-site
/// least-squares sweeps, seeded by an SVD truncation of the target.
CompressionResult variational_compress(const Mps& target, std::size_t chi, double tol = 1e-12,
                                       std::size_t max_sweeps = 20);

/// 1 - |<a|b>|^2 / (<a|a><b|b>)
double infidelity(const Mps& a, const Mps& b);

}  // namespace tns
