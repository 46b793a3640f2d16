#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tns/tensor.hpp"

namespace tns {

inline constexpr std::size_t kUnboundedBond = std::numeric_limits<std::size_t>::max();

/// Bond truncation rules. The cutoff is relative to the largest singular
/// value of the bond; the floor is absolute. `max_discarded_weight` drops the
/// smallest values while their summed s^2 over the total stays below it (the
/// ITensor meaning of "cutoff").
struct TruncationPolicy {
  std::size_t max_bond = kUnboundedBond;
  double svd_cutoff = 1e-12;
  double absolute_floor = 0.0;
  double max_discarded_weight = 0.0;

  void validate() const;

  /// Keep the numerical rank; exceeding `max_bond` is an error.
  static TruncationPolicy exact(std::size_t max_bond) { return {max_bond, 0.0, 0.0}; }
  static TruncationPolicy with_cutoff(double cutoff, std::size_t max_bond = kUnboundedBond) {
    return {max_bond, cutoff, 0.0};
  }

  bool limits_values() const { return svd_cutoff > 0.0 || absolute_floor > 0.0 || max_discarded_weight > 0.0; }
};

class BondOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SvdResult {
  Matrix u;              // rows x k, orthonormal columns
  std::vector<double> s; // k values, nonincreasing, positive
  Matrix vh;             // k x cols, orthonormal rows
  double discarded_weight = 0.0;  // dropped sum s^2 over total sum s^2
  double total_weight = 0.0;      // total sum s^2 before truncation
};

SvdResult truncated_svd(const Eigen::Ref<const Matrix>& m, const TruncationPolicy& policy);

/// Thin QR: m = q r with q having orthonormal columns, k = min(rows, cols).
void thin_qr(const Eigen::Ref<const Matrix>& m, Matrix& q, Matrix& r);
/// Thin LQ: m = l q with q having orthonormal rows.
void thin_lq(const Eigen::Ref<const Matrix>& m, Matrix& l, Matrix& q);

}  // namespace tns
