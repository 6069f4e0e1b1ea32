#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "egolsm/egolsm.hpp"

namespace egolsm::testing {

/// Random symmetric binary adjacency with edge probability p.
inline AdjacencyMatrix random_adjacency(Index n, double p, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (unif(eng) < p) {
        A(i, j) = 1.0;
        A(j, i) = 1.0;
      }
    }
  }
  return AdjacencyMatrix{std::move(A), n};
}

inline Matrix random_symmetric(Index n, std::mt19937_64& eng, double scale = 1.0) {
  std::normal_distribution<double> nrm(0.0, 1.0);
  Matrix X = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double v = scale * nrm(eng);
      X(i, j) = v;
      X(j, i) = v;
    }
  }
  return X;
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& eng,
                            double scale = 1.0) {
  std::normal_distribution<double> nrm(0.0, 1.0);
  Matrix Z(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) Z(i, c) = scale * nrm(eng);
  }
  return Z;
}

inline Matrix random_orthogonal(Index k, std::mt19937_64& eng) {
  const Matrix A = random_matrix(k, k, eng);
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(k, k);
  return Q;
}

/// One-sided Wilcoxon rank-sum p-value, alternative: x stochastically smaller
/// than y. Normal approximation with mid-ranks and tie correction.
inline double wilcoxon_ranksum_less_p(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  std::vector<double> all = x;
  all.insert(all.end(), y.begin(), y.end());
  std::vector<std::size_t> idx(all.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return all[a] < all[b]; });
  std::vector<double> rank(all.size());
  std::size_t i = 0;
  double tie_term = 0.0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && all[idx[j + 1]] == all[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    for (std::size_t q = i; q <= j; ++q) rank[idx[q]] = r;
    i = j + 1;
  }
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  const double N = n1 + n2;
  double R1 = 0.0;
  for (std::size_t q = 0; q < x.size(); ++q) R1 += rank[q];
  const double U = R1 - n1 * (n1 + 1.0) / 2.0;
  const double mu = n1 * n2 / 2.0;
  const double sigma =
      std::sqrt(n1 * n2 / 12.0 * ((N + 1.0) - tie_term / (N * (N - 1.0))));
  const double z = (U + 0.5 - mu) / sigma;
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// One-sided Wilcoxon signed-rank p-value on paired samples, alternative:
/// x < y. Normal approximation.
inline double wilcoxon_signed_rank_less_p(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] != y[i]) d.push_back(y[i] - x[i]);
  }
  if (d.empty()) return 0.5;
  std::vector<std::size_t> idx(d.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(d[a]) < std::abs(d[b]);
  });
  std::vector<double> rank(d.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) rank[idx[q]] = r;
    i = j + 1;
  }
  double w_plus = 0.0;
  for (std::size_t q = 0; q < d.size(); ++q) {
    if (d[q] > 0) w_plus += rank[q];
  }
  const double nn = static_cast<double>(d.size());
  const double mu = nn * (nn + 1.0) / 4.0;
  const double sigma = std::sqrt(nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0);
  const double z = (w_plus - 0.5 - mu) / sigma;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace egolsm::testing
