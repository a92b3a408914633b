#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace fdoe {

/// Nodes and weights of a one-dimensional Gauss rule, nodes ascending.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

namespace detail {

// Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal Jacobi
// matrix of the orthogonal-polynomial recurrence, weights come from the first
// component of the normalized eigenvectors.
inline GaussRule golub_welsch(const Eigen::VectorXd& offdiag) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    jacobi(k, k + 1) = offdiag[k];
    jacobi(k + 1, k) = offdiag[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("Gauss rule eigendecomposition failed");
  GaussRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = solver.eigenvectors().row(0).transpose().array().square();
  // First-row squares of an orthonormal eigenbasis already sum to one; make
  // the normalization exact against rounding.
  rule.weights /= rule.weights.sum();
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]; weights sum to 2.
/// Exact for polynomials of degree <= 2n-1.
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  GaussRule rule = detail::golub_welsch(off);
  rule.weights *= 2.0;
  return rule;
}

/// n-point probabilists' Gauss-Hermite rule: integrates against the standard
/// normal density, weights sum to 1. Exact for polynomial moments of degree
/// <= 2n-1.
inline GaussRule gauss_hermite_prob(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_prob: need at least one node");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return detail::golub_welsch(off);
}

}  // namespace fdoe
