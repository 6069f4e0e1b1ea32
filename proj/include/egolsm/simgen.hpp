#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <random>

#include "egolsm/model.hpp"
#include "egolsm/partial_view.hpp"

namespace egolsm {

/// Deterministic stream addressing: identical (seed, stream) gives identical
/// draws; distinct streams decorrelate parallel replicates.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::mt19937_64 engine() const {
    std::seed_seq seq{seed, stream, static_cast<std::uint64_t>(0x9e3779b97f4a7c15ULL)};
    return std::mt19937_64(seq);
  }
};

namespace detail {

inline Matrix global_centering(const Matrix& M) {
  // J0 M J0 with J0 = I - 11^T/n
  Matrix out = M;
  const Vector row_mean = out.rowwise().mean();
  out.colwise() -= row_mean;
  const Eigen::RowVectorXd col_mean = out.colwise().mean();
  out.rowwise() -= col_mean;
  return out;
}

inline Matrix top_k_factor(const Matrix& G, Index k) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  Matrix Z = Matrix::Zero(G.rows(), k);
  const Vector& vals = eig.eigenvalues();
  for (Index c = 0; c < k; ++c) {
    const Index src = vals.size() - 1 - c;
    if (src < 0 || vals(src) <= 0.0) break;
    Z.col(c) = eig.eigenvectors().col(src) * std::sqrt(vals(src));
  }
  return Z;
}

}  // namespace detail

/// Two-component mixture ground truth: heterogeneity summing to -n, latent
/// part normalized so ||G*||_F = n, covariates normalized so ||X||_F = n,
/// beta = -0.5. Labels record the mixture component of each node.
inline GroundTruth gen_mixture_truth(Index n, Index k, const RngSpec& rng,
                                   double mixture_variance = 0.2) {
  require(n >= 4 && n % 2 == 0, "gen_mixture_truth: n must be even and >= 4");
  require(k >= 1, "gen_mixture_truth: k must be >= 1");
  auto eng = rng.engine();
  std::uniform_real_distribution<double> unif13(1.0, 3.0);
  std::uniform_real_distribution<double> unif_neg(-0.5, 0.0);
  std::uniform_real_distribution<double> unif_pos(0.0, 0.5);
  std::normal_distribution<double> normal01(0.0, 1.0);

  Vector a(n);
  for (Index i = 0; i < n; ++i) a(i) = unif13(eng);
  Vector alpha = -static_cast<double>(n) * a / a.sum();

  Vector mu1(k), mu2(k);
  for (Index c = 0; c < k; ++c) mu1(c) = unif_neg(eng);
  for (Index c = 0; c < k; ++c) mu2(c) = unif_pos(eng);
  const double sd = std::sqrt(mixture_variance);
  Matrix U(n, k);
  for (Index i = 0; i < n; ++i) {
    const Vector& mu = (i < n / 2) ? mu1 : mu2;
    for (Index c = 0; c < k; ++c) U(i, c) = mu(c) + sd * normal01(eng);
  }
  Matrix G = detail::global_centering(U * U.transpose());
  G *= static_cast<double>(n) / G.norm();
  Matrix Z = detail::top_k_factor(G, k);

  Matrix V = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double v = std::min(std::abs(1.0 + normal01(eng)), 2.0);
      V(i, j) = v;
      V(j, i) = v;
    }
  }
  Matrix X = static_cast<double>(n) * V / V.norm();

  LatentModel model;
  model.alpha = std::move(alpha);
  model.beta = -0.5;
  model.Z = std::move(Z);
  model.X = std::move(X);

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (Index i = n / 2; i < n; ++i) labels[static_cast<std::size_t>(i)] = 1;
  return make_ground_truth(std::move(model), std::move(labels));
}

/// Degree-corrected block model reparameterized as an inner-product model:
/// latent part J0 U H U^T J0 with U the membership matrix, k = K - 1.
inline GroundTruth gen_dcsbm(Index n, int K, const Matrix& H,
                             const Vector& alpha, double beta, const Matrix& X,
                             const RngSpec& /*rng*/,
                             const std::vector<Index>* sizes = nullptr) {
  require(K >= 1, "gen_dcsbm: K must be >= 1");
  require(H.rows() == K && H.cols() == K, "gen_dcsbm: H must be K x K");
  require((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-12,
          "gen_dcsbm: H must be symmetric");
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gen_dcsbm: H must be positive definite");
  }

  std::vector<Index> block_sizes;
  if (sizes != nullptr) {
    block_sizes = *sizes;
    Index total = 0;
    for (Index s : block_sizes) total += s;
    require(static_cast<int>(block_sizes.size()) == K && total == n,
            "gen_dcsbm: block sizes must sum to n");
  } else {
    require(n % K == 0, "gen_dcsbm: n must be divisible by K for equal blocks");
    block_sizes.assign(static_cast<std::size_t>(K), n / K);
  }

  Matrix U = Matrix::Zero(n, K);
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  Index row = 0;
  for (int b = 0; b < K; ++b) {
    for (Index r = 0; r < block_sizes[static_cast<std::size_t>(b)]; ++r) {
      U(row, b) = 1.0;
      labels[static_cast<std::size_t>(row)] = b;
      ++row;
    }
  }
  const Matrix latent = detail::global_centering(U * H * U.transpose());
  const Index k = std::max<Index>(1, K - 1);
  Matrix Z = detail::top_k_factor(latent, k);

  LatentModel model;
  model.alpha = alpha;
  model.beta = beta;
  model.Z = std::move(Z);
  model.X = X;
  return make_ground_truth(std::move(model), std::move(labels));
}

/// Independent Bernoulli(sigmoid(theta_ij)) draws on the upper triangle,
/// mirrored; the diagonal stays zero.
inline AdjacencyMatrix sample_adjacency(const Matrix& theta_star,
                                        const RngSpec& rng) {
  const Index n = theta_star.rows();
  require(theta_star.cols() == n, "sample_adjacency: theta must be square");
  auto eng = rng.engine();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double p = sigmoid(theta_star(i, j));
      if (unif(eng) < p) {
        A(i, j) = 1.0;
        A(j, i) = 1.0;
      }
    }
  }
  return AdjacencyMatrix{std::move(A), n};
}

/// Neighborhood scenarios: keep the sampled row (imbalanced), resample the
/// center's edges uniformly at its empirical rate (balanced), or connect the
/// center to everyone (full).
inline AdjacencyMatrix apply_scenario(const AdjacencyMatrix& A, Index center,
                                      Scenario scenario, const RngSpec& rng) {
  require(center >= 0 && center < A.n, "apply_scenario: center out of range");
  if (scenario == Scenario::imbalanced) return A;
  AdjacencyMatrix out = A;
  if (scenario == Scenario::full) {
    for (Index j = 0; j < A.n; ++j) {
      if (j == center) continue;
      out.A(center, j) = 1.0;
      out.A(j, center) = 1.0;
    }
    return out;
  }
  const double p_hat = A.A.row(center).sum() / static_cast<double>(A.n);
  auto eng = rng.engine();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index j = 0; j < A.n; ++j) {
    if (j == center) continue;
    const double u = unif(eng) < p_hat ? 1.0 : 0.0;
    out.A(center, j) = u;
    out.A(j, center) = u;
  }
  return out;
}

}  // namespace egolsm
