#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <iostream>

#include "egolsm/solver.hpp"

namespace egolsm {

struct InitConfig {
  // Multiplier c in tau = c sqrt(n p_hat). The classical choice sits slightly
  // above 2; for ego-masked adjacencies the observed part is a thin stripe
  // whose noise edge is well below 2 sqrt(n p_hat), and a threshold this high
  // discards the signal whenever the neighborhood is small. 1.4 keeps the
  // masked regime alive without hurting the fully observed one.
  double usvt_threshold_const = 1.4;
  double prob_clip_eps = 1e-3;
  int k = 2;
  int refine_iters = 15;      // alternations between the linear fit and the
  double refine_tol = 1e-11;  // low-rank factorization of the residual
};

/// Spectral denoising of the masked adjacency: zero every singular value below
/// tau = c sqrt(n p_hat), with p_hat the edge density over observed pairs,
/// then clip the reconstruction into [eps, 1 - eps]. Entries on the hidden
/// block are not meaningful and are ignored downstream.
inline Matrix usvt_probability_estimate(const Matrix& B, const PartialView& view,
                                        const InitConfig& config) {
  require(B.rows() == view.n && B.cols() == view.n,
          "usvt_probability_estimate: B must be n x n");
  const double n = static_cast<double>(view.n);
  const double n_hidden = n - static_cast<double>(view.n_S);
  const double observed_pairs = 0.5 * (n * (n - 1.0) - n_hidden * (n_hidden - 1.0));
  double edge_sum = 0.0;
  for (Index i : view.members) {
    for (Index j = i + 1; j < view.n; ++j) edge_sum += B(i, j);
  }
  for (Index i : view.complement) {
    for (Index j : view.members) {
      if (j > i) edge_sum += B(i, j);
    }
  }
  const double p_hat = observed_pairs > 0.0 ? edge_sum / observed_pairs : 0.0;
  const double tau = config.usvt_threshold_const * std::sqrt(n * p_hat);

  // B is symmetric, so its singular values are |eigenvalues| and the
  // singular-value-thresholded reconstruction is the eigenvalue-thresholded
  // one. The self-adjoint solver is also far more robust than a general SVD.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(B);
  const Vector& vals = eig.eigenvalues();
  Matrix P = Matrix::Zero(view.n, view.n);
  for (Index i = 0; i < vals.size(); ++i) {
    if (std::abs(vals(i)) >= tau) {
      P.noalias() +=
          vals(i) * eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose();
    }
  }
  const double lo = config.prob_clip_eps;
  const double hi = 1.0 - config.prob_clip_eps;
  return P.unaryExpr([lo, hi](double p) { return std::clamp(p, lo, hi); });
}

namespace detail {

/// Least-squares fit of additive effects plus a covariate slope,
///   y_ij ~ alpha_i + alpha_j + beta X_ij,
/// over the observed off-diagonal pairs. The normal system is factorized once
/// and reused across refinement rounds (only the target changes).
class AdditiveEffectsSolver {
 public:
  AdditiveEffectsSolver(const Matrix& X, const PartialView& view) : n_(view.n) {
    beta_active_ = mask_transform(X, view).squaredNorm() > 0.0;
    const Index dim = n_ + (beta_active_ ? 1 : 0);
    Matrix N = Matrix::Zero(dim, dim);
    for (Index a : view.members) {
      for (Index b = 0; b < n_; ++b) {
        if (b != a) N(a, b) = 1.0;
      }
      N(a, a) = static_cast<double>(n_ - 1);
    }
    for (Index a : view.complement) {
      for (Index b : view.members) N(a, b) = 1.0;
      N(a, a) = static_cast<double>(view.n_S);
    }
    if (beta_active_) {
      const Matrix Xm = mask_transform(X, view);
      for (Index a = 0; a < n_; ++a) {
        N(a, n_) = Xm.row(a).sum();
        N(n_, a) = N(a, n_);
      }
      N(n_, n_) = 0.5 * Xm.squaredNorm();
      Xm_ = Xm;
    }
    cod_.compute(N);
  }

  /// target must already be masked, symmetric, zero diagonal.
  std::pair<Vector, double> solve(const Matrix& target) const {
    const Index dim = n_ + (beta_active_ ? 1 : 0);
    Vector rhs(dim);
    rhs.head(n_) = target.rowwise().sum();
    if (beta_active_) rhs(n_) = 0.5 * (target.cwiseProduct(Xm_)).sum();
    const Vector sol = cod_.solve(rhs);
    return {sol.head(n_), beta_active_ ? sol(n_) : 0.0};
  }

 private:
  Index n_;
  bool beta_active_ = false;
  Matrix Xm_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
};

/// Completion of the hidden block of the symmetric residual M from its
/// observed stripe. The latent column space is estimated from the right
/// singular vectors of the observed rows (which see every column), a small
/// symmetric core is fitted to the observed entries by least squares, and the
/// resulting low-rank surrogate fills the unobserved block.
inline void complete_hidden_block(Matrix& M, const PartialView& view, Index k) {
  if (view.complement.empty() || view.members.empty()) return;
  const Matrix stripe = select_rows(M, view.members);  // n_S x n, fully observed
  if (stripe.cwiseAbs().maxCoeff() == 0.0) return;
  Eigen::JacobiSVD<Matrix> svd(stripe, Eigen::ComputeThinV);
  const Index q = std::min<Index>(k, svd.singularValues().size());
  if (q == 0 || svd.singularValues()(0) <= 0.0) return;
  const Matrix V = svd.matrixV().leftCols(q);  // n x q

  // Fit the symmetric core C in M ~ V C V^T over observed off-diagonal pairs.
  const Index m = q * (q + 1) / 2;
  Matrix normal = Matrix::Zero(m, m);
  Vector rhs = Vector::Zero(m);
  Vector a(m);
  auto accumulate_pair = [&](Index i, Index j) {
    Index t = 0;
    for (Index p = 0; p < q; ++p) {
      for (Index r = p; r < q; ++r) {
        a(t++) = p == r ? V(i, p) * V(j, p) : V(i, p) * V(j, r) + V(i, r) * V(j, p);
      }
    }
    normal.noalias() += a * a.transpose();
    rhs.noalias() += a * M(i, j);
  };
  for (Index i : view.members) {
    for (Index j = i + 1; j < view.n; ++j) accumulate_pair(i, j);
  }
  for (Index i : view.complement) {
    for (Index j : view.members) {
      if (j > i) accumulate_pair(i, j);
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(normal);
  const Vector c_vec = cod.solve(rhs);
  Matrix C = Matrix::Zero(q, q);
  Index t = 0;
  for (Index p = 0; p < q; ++p) {
    for (Index r = p; r < q; ++r) {
      C(p, r) = c_vec(t);
      C(r, p) = c_vec(t);
      ++t;
    }
  }
  const Matrix VC = V * C;
  const double cap = 3.0 * M.cwiseAbs().maxCoeff();
  for (Index a_i : view.complement) {
    for (Index b_i : view.complement) {
      M(a_i, b_i) = std::clamp(VC.row(a_i).dot(V.row(b_i)), -cap, cap);
    }
  }
}

/// Top-k factor of a symmetric matrix, negative eigenvalues truncated at zero;
/// pads with zero columns (with a warning) when fewer than k are positive.
inline Matrix top_k_psd_factor(const Matrix& M, Index k) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  const Vector& vals = eig.eigenvalues();  // ascending
  Matrix Z = Matrix::Zero(M.rows(), k);
  Index kept = 0;
  const double floor = 1e-12 * std::max(1.0, std::abs(vals(vals.size() - 1)));
  for (Index c = 0; c < k; ++c) {
    const Index src = vals.size() - 1 - c;
    if (src < 0 || vals(src) <= floor) break;
    Z.col(c) = eig.eigenvectors().col(src) * std::sqrt(vals(src));
    ++kept;
  }
  if (kept < k) {
    std::cerr << "decompose_initial: only " << kept << " positive eigenvalues for k="
              << k << ", padding with zero columns\n";
  }
  return Z;
}

}  // namespace detail

/// Invert the probability estimate into initial parameters: theta = logit(P)
/// on observed entries, additive effects and the covariate slope by least
/// squares, and latent positions from the group-centered residual. The
/// unobserved parts of the residual (the hidden block and the diagonal) are
/// imputed by the stripe completion and then by alternating the linear fit
/// with the factorization.
inline ParameterState decompose_initial(const Matrix& P_hat, const Matrix& X,
                                        const PartialView& view, Index k,
                                        int refine_iters = 15,
                                        double refine_tol = 1e-11) {
  const Index n = view.n;
  require(P_hat.rows() == n && P_hat.cols() == n,
          "decompose_initial: P_hat must be n x n");
  require(k >= 1, "decompose_initial: k must be at least 1");

  Matrix theta0 = P_hat.unaryExpr([](double p) {
    return logit(std::clamp(p, 1e-15, 1.0 - 1e-15));
  });
  theta0 = 0.5 * (theta0 + theta0.transpose().eval());
  theta0.diagonal().setZero();
  mask_in_place(theta0, view);

  const detail::AdditiveEffectsSolver ls(X, view);
  Matrix G = Matrix::Zero(n, n);
  Vector alpha = Vector::Zero(n);
  double beta = 0.0;
  Matrix Z = Matrix::Zero(n, k);

  for (int round = 0; round < std::max(1, refine_iters); ++round) {
    Matrix target = theta0 - G;
    target.diagonal().setZero();
    mask_in_place(target, view);
    auto [alpha_new, beta_new] = ls.solve(target);

    // Residual after removing the additive part. The hidden block is not
    // observed: the first round completes it from the observed blocks, later
    // rounds carry over the current latent estimate. The diagonal always
    // carries the current latent estimate.
    Matrix M = theta0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i != j) M(i, j) -= alpha_new(i) + alpha_new(j) + beta_new * X(i, j);
      }
    }
    mask_in_place(M, view);
    M.diagonal() = G.diagonal();
    if (round == 0) {
      detail::complete_hidden_block(M, view, k);
    } else {
      for (Index a : view.complement) {
        for (Index b : view.complement) M(a, b) = G(a, b);
      }
    }
    M = 0.5 * (M + M.transpose().eval());
    M = apply_centering(M, view);
    M = apply_centering(M.transpose().eval(), view);

    Z = detail::top_k_psd_factor(M, k);
    const Matrix G_new = Z * Z.transpose();

    const double change = std::max((alpha_new - alpha).cwiseAbs().maxCoeff(),
                                   std::abs(beta_new - beta));
    alpha = std::move(alpha_new);
    beta = beta_new;
    const double g_change = (G_new - G).cwiseAbs().maxCoeff();
    G = G_new;
    if (std::max(change, g_change) < refine_tol) break;
  }

  ParameterState state;
  state.Z = apply_centering(Z, view);
  state.alpha = std::move(alpha);
  state.beta = beta;
  return state;
}

inline ParameterState initialize(const PartialView& view, const Matrix& X,
                                 const InitConfig& config) {
  const Matrix P_hat = usvt_probability_estimate(view.B, view, config);
  return decompose_initial(P_hat, X, view, config.k, config.refine_iters,
                           config.refine_tol);
}

}  // namespace egolsm
