#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace tns {

template <class Apply>
double lanczos_ground(Apply&& apply, Eigen::VectorXcd& v, std::size_t krylov_dim, double tol, std::size_t restarts) {
  const Eigen::Index dim = v.size();
  if (dim == 0) throw std::invalid_argument("lanczos: empty start vector");
  double nv = v.norm();
  if (!(nv > 0.0)) {
    v.setOnes();
    nv = v.norm();
  }
  v /= nv;
  const Eigen::Index kmax = std::min<Eigen::Index>(static_cast<Eigen::Index>(krylov_dim), dim);
  double theta = 0.0;
  for (std::size_t restart = 0; restart <= restarts; ++restart) {
    Eigen::MatrixXcd basis(dim, kmax);
    std::vector<double> alpha, beta;
    basis.col(0) = v;
    Eigen::Index k = 0;
    double last_beta = 0.0;
    for (; k < kmax; ++k) {
      Eigen::VectorXcd w = apply(basis.col(k));
      alpha.push_back(basis.col(k).dot(w).real());
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j <= k; ++j) w -= basis.col(j) * basis.col(j).dot(w);
      }
      last_beta = w.norm();
      if (k + 1 == kmax || last_beta < 1e-13 * std::max(1.0, std::abs(alpha.back()))) {
        ++k;
        break;
      }
      beta.push_back(last_beta);
      basis.col(k + 1) = w / last_beta;
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      t(j, j) = alpha[static_cast<std::size_t>(j)];
      if (j + 1 < k) t(j, j + 1) = t(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    theta = es.eigenvalues()(0);
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    v = basis.leftCols(k) * y.cast<std::complex<double>>();
    v /= v.norm();
    const double residual = std::abs(last_beta * y(k - 1));
    if (residual < tol * std::max(1.0, std::abs(theta)) || k == dim) break;
  }
  return theta;
}

}  // namespace tns
