#pragma once

#include "egolsm/partial_view.hpp"

namespace egolsm {

/// Negative log-likelihood of the observed data:
///   -sum over observed unordered pairs of [ B_ij Theta_ij + log(1 - sigma(Theta_ij)) ].
/// A pair is observed when at least one endpoint lies in the neighborhood set;
/// the conditional variant drops every pair containing the center.
/// Iterates the mask pattern directly, so the cost is O(n * n_S).
inline double neg_log_likelihood(const Matrix& B, const Matrix& theta,
                                 const PartialView& view,
                                 bool conditional = false) {
  require(theta.rows() == view.n && theta.cols() == view.n,
          "neg_log_likelihood: theta must be n x n");
  require(B.rows() == view.n && B.cols() == view.n,
          "neg_log_likelihood: B must be n x n");
  double acc = 0.0;
  const Index c = view.center;
  // Rows in S see every column; rows outside S only see columns in S.
  for (Index i : view.members) {
    if (conditional && i == c) continue;
    for (Index j = i + 1; j < view.n; ++j) {
      if (conditional && j == c) continue;
      acc += softplus(theta(i, j)) - B(i, j) * theta(i, j);
    }
  }
  for (Index i : view.complement) {
    for (Index j : view.members) {
      if (j <= i) continue;
      if (conditional && j == c) continue;
      acc += softplus(theta(i, j)) - B(i, j) * theta(i, j);
    }
  }
  return acc;
}

/// B - S(P) with P = sigma(Theta) and the diagonal of P zeroed; the residual
/// vanishes on the hidden block and on the diagonal.
inline Matrix masked_residual(const Matrix& B, const Matrix& theta,
                              const PartialView& view) {
  Matrix P = theta.unaryExpr([](double t) { return sigmoid(t); });
  P.diagonal().setZero();
  mask_in_place(P, view);
  return B - P;
}

struct LikelihoodGradients {
  Matrix z;       // n x k
  Vector alpha;   // n
  double beta;
};

/// Gradients of neg_log_likelihood with respect to (Z, alpha, beta).
/// With E = S(P) - B (zero diagonal):
///   d/dZ = E Z,  d/dalpha = E 1,  d/dbeta = <E, X> / 2.
inline LikelihoodGradients likelihood_gradients(const Matrix& B,
                                                const Vector& alpha, double beta,
                                                const Matrix& Z, const Matrix& X,
                                                const PartialView& view) {
  const Matrix theta = assemble_theta(alpha, beta, Z, X);
  const Matrix E = -masked_residual(B, theta, view);
  LikelihoodGradients g;
  g.z.noalias() = E * Z;
  g.alpha = E.rowwise().sum();
  g.beta = 0.5 * (E.cwiseProduct(X)).sum();
  return g;
}

}  // namespace egolsm
