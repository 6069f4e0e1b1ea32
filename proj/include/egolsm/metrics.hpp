#pragma once

#include <Eigen/SVD>

#include <limits>

#include "egolsm/partial_view.hpp"

namespace egolsm {

struct ProcrustesResult {
  Matrix rotation;        // k x k orthogonal
  double aligned_error;   // || Z_hat - Z_ref * rotation ||_F
};

/// Orthogonal Procrustes: R = argmin over O(k) of || Z_hat - Z_ref R ||_F,
/// obtained from the SVD of Z_ref^T Z_hat.
inline ProcrustesResult procrustes_align(const Matrix& Z_hat,
                                         const Matrix& Z_ref) {
  require(Z_hat.rows() == Z_ref.rows() && Z_hat.cols() == Z_ref.cols(),
          "procrustes_align: shapes must match");
  const Matrix M = Z_ref.transpose() * Z_hat;
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult r;
  r.rotation = svd.matrixU() * svd.matrixV().transpose();
  r.aligned_error = (Z_hat - Z_ref * r.rotation).norm();
  return r;
}

inline double operator_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

/// || S(d 1^T) ||_F^2 in closed form: rows in S keep all n entries, rows
/// outside S keep only the n_S entries in the observed columns.
inline double masked_rank_one_sq_norm(const Vector& d, const PartialView& view) {
  double acc = 0.0;
  const double n = static_cast<double>(view.n);
  const double ns = static_cast<double>(view.n_S);
  for (Index i : view.members) acc += n * d(i) * d(i);
  for (Index i : view.complement) acc += ns * d(i) * d(i);
  return acc;
}

/// Composite error driving the convergence analysis:
///   e_t = ||JZ*||_op^2 ||dZ||_F^2 + 2 ||S(dalpha 1^T)||_F^2 + dbeta^2 ||S(X)||_F^2
/// with dZ the Procrustes-aligned deviation from the group-centered truth.
/// Precomputes everything that depends only on the truth and the view, so that
/// per-iteration tracking costs O(n k^2).
class TruthTracker {
 public:
  TruthTracker(const GroundTruth& truth, const PartialView& view)
      : view_(&view) {
    Zc_ = apply_centering(truth.model.Z, view);
    Zc_op_ = operator_norm(Zc_);
    Zc_gram_ = Zc_.transpose() * Zc_;
    Zc_gram_sq_ = Zc_gram_.squaredNorm();
    SX_sq_ = mask_transform(truth.model.X, view).squaredNorm();
    alpha_star_ = truth.model.alpha;
    beta_star_ = truth.model.beta;
  }

  const Matrix& centered_truth() const { return Zc_; }
  double centered_op_norm() const { return Zc_op_; }

  /// ||dZ||_F after Procrustes alignment against the centered truth.
  double aligned_z_error(const Matrix& Z) const {
    return procrustes_align(Z, Zc_).aligned_error;
  }

  double e_t(const Matrix& Z, const Vector& alpha, double beta) const {
    const double dz = aligned_z_error(Z);
    const double dbeta = beta - beta_star_;
    return Zc_op_ * Zc_op_ * dz * dz +
           2.0 * masked_rank_one_sq_norm(alpha - alpha_star_, *view_) +
           dbeta * dbeta * SX_sq_;
  }

  /// || Z Z^T - (JZ*)(JZ*)^T ||_F^2 via Gram matrices, O(n k^2).
  double delta_G_centered_sq(const Matrix& Z) const {
    const Matrix g = Z.transpose() * Z;
    const Matrix cross = Zc_.transpose() * Z;
    return g.squaredNorm() + Zc_gram_sq_ - 2.0 * cross.squaredNorm();
  }

  /// c = ||dZ||_F / ||JZ*||_op.
  double z_ratio(const Matrix& Z) const {
    if (Zc_op_ == 0.0) return std::numeric_limits<double>::infinity();
    return aligned_z_error(Z) / Zc_op_;
  }

 private:
  const PartialView* view_;
  Matrix Zc_;
  double Zc_op_ = 0.0;
  Matrix Zc_gram_;
  double Zc_gram_sq_ = 0.0;
  double SX_sq_ = 0.0;
  Vector alpha_star_;
  double beta_star_ = 0.0;
};

struct ErrorReport {
  double e_t = 0.0;
  double delta_Z_F = 0.0;            // post-Procrustes
  double delta_G_F_sq = 0.0;         // vs Z* Z*^T
  double delta_Theta_F_sq = 0.0;
  double delta_S_Theta_F_sq = 0.0;
  double relative_error_Theta = 0.0;
};

inline ErrorReport error_metric(const Matrix& Z_t, const Vector& alpha_t,
                                double beta_t, const GroundTruth& truth,
                                const PartialView& view,
                                bool conditional = false) {
  ErrorReport rep;
  const TruthTracker tracker(truth, view);
  rep.delta_Z_F = tracker.aligned_z_error(Z_t);
  rep.e_t = tracker.e_t(Z_t, alpha_t, beta_t);

  Matrix dG = Z_t * Z_t.transpose() - truth.G_star;
  Matrix dTheta =
      assemble_theta(alpha_t, beta_t, Z_t, truth.model.X) - truth.Theta_star;
  if (conditional) {
    // The conditional problem carries no information about the center's own
    // parameters; its error rows/columns are zeroed by convention.
    dG.row(view.center).setZero();
    dG.col(view.center).setZero();
    dTheta.row(view.center).setZero();
    dTheta.col(view.center).setZero();
  }
  rep.delta_G_F_sq = dG.squaredNorm();
  rep.delta_Theta_F_sq = dTheta.squaredNorm();
  mask_in_place(dTheta, view);
  rep.delta_S_Theta_F_sq = dTheta.squaredNorm();
  const double theta_star_sq = truth.Theta_star.squaredNorm();
  rep.relative_error_Theta =
      theta_star_sq > 0.0 ? rep.delta_Theta_F_sq / theta_star_sq : 0.0;
  return rep;
}

struct ImbalanceResult {
  double U_S = 0.0;
  double U_S_normalized = 0.0;
};

/// U_S^2 = (1/n) sum_i ( z_i . s )^2 with s the sum of the neighborhood's
/// latent positions; zero exactly when the neighborhood is strictly balanced.
inline ImbalanceResult imbalance(const Matrix& Z_star, const PartialView& view,
                                 double G_star_norm) {
  require(Z_star.rows() == view.n, "imbalance: Z must have n rows");
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(Z_star.cols());
  for (Index j : view.members) s += Z_star.row(j);
  const Vector prods = Z_star * s.transpose();
  ImbalanceResult r;
  r.U_S = std::sqrt(prods.squaredNorm() / static_cast<double>(view.n));
  r.U_S_normalized = G_star_norm > 0.0 ? r.U_S / G_star_norm : 0.0;
  return r;
}

struct DiagnosticStats {
  double r_S = 0.0;
  Index n_S = 0;
  double U_S = 0.0;
  double U_S_normalized = 0.0;
  double gamma_S = 0.0;       // min(r_S, kappa'^-4)
  double kappa_prime = 0.0;   // sigma_1(JZ*) / sigma_k((JZ*)_S)
  double p_S = 0.0;           // average connection probability of the center
  double delta_n_sq = 0.0;    // || sum_i P_center,i z*_i ||^2
};

inline DiagnosticStats neighborhood_diagnostics(const GroundTruth& truth,
                                                const PartialView& view) {
  DiagnosticStats d;
  d.r_S = view.r_S;
  d.n_S = view.n_S;

  const Matrix& Zs = truth.model.Z;
  const ImbalanceResult imb = imbalance(Zs, view, truth.G_star.norm());
  d.U_S = imb.U_S;
  d.U_S_normalized = imb.U_S_normalized;

  const Matrix Zc = apply_centering(Zs, view);
  const Matrix Zc_S = select_rows(Zc, view.members);
  const Index k = Zc.cols();
  Eigen::JacobiSVD<Matrix> svd_S(Zc_S);
  const double sigma_k =
      (Zc_S.rows() >= k && k > 0) ? svd_S.singularValues()(k - 1) : 0.0;
  if (sigma_k > 0.0) {
    d.kappa_prime = operator_norm(Zc) / sigma_k;
    const double kp4 = std::pow(d.kappa_prime, 4.0);
    d.gamma_S = std::min(d.r_S, 1.0 / kp4);
  } else {
    d.kappa_prime = std::numeric_limits<double>::infinity();
    d.gamma_S = 0.0;
  }

  const Index c = view.center;
  Eigen::RowVectorXd weighted = Eigen::RowVectorXd::Zero(Zs.cols());
  double psum = 0.0;
  for (Index i = 0; i < view.n; ++i) {
    const double p = sigmoid(truth.Theta_star(c, i));
    psum += p;
    weighted += p * Zs.row(i);
  }
  d.p_S = psum / static_cast<double>(view.n);
  d.delta_n_sq = weighted.squaredNorm();
  return d;
}

}  // namespace egolsm
