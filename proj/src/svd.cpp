#include "tns/svd.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>
#include <fmt/format.h>

namespace tns {

void TruncationPolicy::validate() const {
  if (max_bond == 0) throw std::invalid_argument("truncation policy: max_bond must be positive");
  if (svd_cutoff < 0.0 || absolute_floor < 0.0 || max_discarded_weight < 0.0 || !std::isfinite(svd_cutoff) ||
      !std::isfinite(absolute_floor) || !(max_discarded_weight < 1.0)) {
    throw std::invalid_argument("truncation policy: cutoffs must be finite and nonnegative");
  }
  if (max_bond == kUnboundedBond && !limits_values()) {
    throw std::invalid_argument("truncation policy: set a finite max_bond or a nonzero cutoff");
  }
}

namespace {

using ColMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace

SvdResult truncated_svd(const Eigen::Ref<const Matrix>& m, const TruncationPolicy& policy) {
  policy.validate();
  if (m.size() == 0) throw DegenerateInputError("truncated_svd: degenerate input (empty matrix)");
  if (!m.allFinite()) throw NumericalError("truncated_svd: non-finite input");

  const ColMatrix a = m;
  ColMatrix mu, mv;
  Eigen::VectorXd sv;
  {
    Eigen::BDCSVD<ColMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("truncated_svd: SVD did not converge");
    mu = svd.matrixU();
    mv = svd.matrixV();
    sv = svd.singularValues();
  }
  // Eigen 3.4's divide-and-conquer SVD occasionally returns an inconsistent
  // factorization for rank-deficient input; verify and fall back to Jacobi.
  const double anorm = a.norm();
  if ((a - mu * sv.asDiagonal() * mv.adjoint()).norm() > 1e-11 * anorm) {
    Eigen::JacobiSVD<ColMatrix> jac(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (jac.info() != Eigen::Success) throw NumericalError("truncated_svd: SVD did not converge");
    mu = jac.matrixU();
    mv = jac.matrixV();
    sv = jac.singularValues();
    if ((a - mu * sv.asDiagonal() * mv.adjoint()).norm() > 1e-11 * anorm)
      throw NumericalError("truncated_svd: inaccurate factorization");
  }

  const Eigen::Index full = sv.size();
  const double smax = full > 0 ? sv(0) : 0.0;
  if (!(smax > 0.0)) throw DegenerateInputError("truncated_svd: degenerate input (zero matrix)");

  double total = 0.0;
  for (Eigen::Index i = 0; i < full; ++i) total += sv(i) * sv(i);

  // numerical rank: values indistinguishable from roundoff are never kept
  const double roundoff = smax * 4.0 * std::numeric_limits<double>::epsilon() *
                          static_cast<double>(std::max(m.rows(), m.cols()));
  Eigen::Index rank = 0;
  while (rank < full && sv(rank) > roundoff) ++rank;

  Eigen::Index keep = 0;
  while (keep < rank && sv(keep) >= policy.svd_cutoff * smax && sv(keep) >= policy.absolute_floor) ++keep;
  if (policy.max_discarded_weight > 0.0) {
    double tail = 0.0;
    Eigen::Index k = full;
    while (k > 1 && tail + sv(k - 1) * sv(k - 1) <= policy.max_discarded_weight * total) {
      --k;
      tail += sv(k) * sv(k);
    }
    keep = std::min(keep, k);
  }
  keep = std::max<Eigen::Index>(keep, 1);

  if (static_cast<std::size_t>(keep) > policy.max_bond) {
    if (!policy.limits_values()) {
      throw BondOverflowError(fmt::format("bond dimension {} exceeds max_bond {} with zero cutoff",
                                          keep, policy.max_bond));
    }
    keep = static_cast<Eigen::Index>(policy.max_bond);
  }

  double dropped = 0.0;
  for (Eigen::Index i = keep; i < full; ++i) dropped += sv(i) * sv(i);

  SvdResult out;
  out.u = mu.leftCols(keep);
  out.vh = mv.leftCols(keep).adjoint();
  out.s.assign(sv.data(), sv.data() + keep);
  out.discarded_weight = dropped / total;
  out.total_weight = total;
  return out;
}

void thin_qr(const Eigen::Ref<const Matrix>& m, Matrix& q, Matrix& r) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  const ColMatrix a = m;
  Eigen::HouseholderQR<ColMatrix> qr(a);
  q = qr.householderQ() * ColMatrix::Identity(m.rows(), k);
  r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
}

void thin_lq(const Eigen::Ref<const Matrix>& m, Matrix& l, Matrix& q) {
  Matrix qt, rt;
  thin_qr(m.adjoint(), qt, rt);
  l = rt.adjoint();
  q = qt.adjoint();
}

}  // namespace tns
