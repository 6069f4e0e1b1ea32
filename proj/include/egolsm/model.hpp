#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "egolsm/common.hpp"

namespace egolsm {

/// Numerically stable logistic function; safe for |x| well beyond 700.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("logit: argument must lie strictly in (0,1)");
  }
  return std::log(p / (1.0 - p));
}

/// log(1 + e^x) without overflow; log(1 - sigmoid(x)) == -softplus(x).
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double log_sigmoid(double x) { return -softplus(-x); }

struct ThetaBounds {
  double M1 = 6.0;
  double M2 = 0.01;
};

/// Inner-product model: logit(P_ij) = alpha_i + alpha_j + beta * X_ij + z_i . z_j.
/// alpha carries degree heterogeneity, Z the latent positions (rows z_i),
/// X a symmetric covariate matrix with zero diagonal.
struct LatentModel {
  Vector alpha;        // length n
  double beta = 0.0;
  Matrix Z;            // n x k
  Matrix X;            // n x n, symmetric, zero diagonal
  ThetaBounds bounds;

  Index n() const { return alpha.size(); }
  Index k() const { return Z.cols(); }
};

inline Matrix assemble_theta(const Vector& alpha, double beta, const Matrix& Z,
                             const Matrix& X) {
  const Index n = alpha.size();
  require(Z.rows() == n, "assemble_theta: Z must have n rows (field Z)");
  require(X.rows() == n && X.cols() == n,
          "assemble_theta: X must be n x n (field X)");
  Matrix theta = alpha.replicate(1, n);
  theta += theta.transpose().eval();
  theta.noalias() += Z * Z.transpose();
  if (beta != 0.0) theta += beta * X;
  return theta;
}

inline Matrix assemble_theta(const LatentModel& m) {
  return assemble_theta(m.alpha, m.beta, m.Z, m.X);
}

/// Symmetric binary adjacency with zero diagonal.
struct AdjacencyMatrix {
  Matrix A;
  Index n = 0;
};

inline AdjacencyMatrix make_adjacency(Matrix A) {
  const Index n = A.rows();
  require(A.cols() == n, "adjacency matrix must be square");
  for (Index i = 0; i < n; ++i) {
    require(A(i, i) == 0.0, "adjacency matrix must have zero diagonal");
    for (Index j = i + 1; j < n; ++j) {
      require(A(i, j) == A(j, i), "adjacency matrix must be symmetric");
      require(A(i, j) == 0.0 || A(i, j) == 1.0,
              "adjacency entries must be 0 or 1");
    }
  }
  return AdjacencyMatrix{std::move(A), n};
}

enum class Scenario { imbalanced, balanced, full };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::imbalanced: return "imbalanced";
    case Scenario::balanced: return "balanced";
    case Scenario::full: return "full";
  }
  return "?";
}

/// Starred quantities backing simulation studies and error metrics.
struct GroundTruth {
  LatentModel model;
  Matrix Theta_star;
  Matrix G_star;               // Z* Z*^T
  std::vector<int> labels;     // community labels, empty when not applicable
  Scenario scenario = Scenario::imbalanced;
};

inline GroundTruth make_ground_truth(LatentModel model,
                                     std::vector<int> labels = {},
                                     Scenario scenario = Scenario::imbalanced) {
  GroundTruth t;
  t.Theta_star = assemble_theta(model);
  t.G_star = model.Z * model.Z.transpose();
  t.model = std::move(model);
  t.labels = std::move(labels);
  t.scenario = scenario;
  return t;
}

}  // namespace egolsm
