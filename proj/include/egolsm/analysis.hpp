#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <queue>
#include <random>

#include "egolsm/simgen.hpp"

namespace egolsm {

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares. Deterministic given the rng spec.
inline std::vector<int> kmeans_cluster(const Matrix& points, int K, int restarts,
                                       const RngSpec& rng) {
  const Index n = points.rows();
  require(K >= 1, "kmeans_cluster: K must be >= 1");
  if (K > n) throw std::invalid_argument("kmeans_cluster: K exceeds point count");
  require(restarts >= 1, "kmeans_cluster: restarts must be >= 1");

  auto eng = rng.engine();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> best(static_cast<std::size_t>(n), 0);
  double best_wcss = std::numeric_limits<double>::infinity();

  for (int run = 0; run < restarts; ++run) {
    // k-means++ seeding
    Matrix centers(K, points.cols());
    std::uniform_int_distribution<Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(eng));
    Vector dist_sq = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < K; ++c) {
      const double total = dist_sq.sum();
      Index chosen = 0;
      if (total > 0.0) {
        double target = unif(eng) * total;
        for (Index i = 0; i < n; ++i) {
          target -= dist_sq(i);
          if (target <= 0.0) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = pick(eng);
      }
      centers.row(c) = points.row(chosen);
      dist_sq = dist_sq.cwiseMin(
          (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 200; ++iter) {
      bool changed = false;
      for (Index i = 0; i < n; ++i) {
        int arg = 0;
        double bestd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < K; ++c) {
          const double d = (points.row(i) - centers.row(c)).squaredNorm();
          if (d < bestd) {
            bestd = d;
            arg = c;
          }
        }
        if (labels[static_cast<std::size_t>(i)] != arg) {
          labels[static_cast<std::size_t>(i)] = arg;
          changed = true;
        }
      }
      centers.setZero();
      std::vector<Index> counts(static_cast<std::size_t>(K), 0);
      for (Index i = 0; i < n; ++i) {
        centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < K; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        } else {
          centers.row(c) = points.row(pick(eng));  // re-seed an empty cluster
        }
      }
      if (!changed) break;
    }

    double wcss = 0.0;
    for (Index i = 0; i < n; ++i) {
      wcss += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)]))
                  .squaredNorm();
    }
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best = labels;
    }
  }
  return best;
}

namespace detail {

/// Hungarian assignment maximizing the total of `score` (square matrix).
inline std::vector<int> max_assignment(const Matrix& score) {
  const Index m = score.rows();
  // Standard O(m^3) potentials formulation on the negated (minimization) cost.
  const double shift = score.maxCoeff();
  std::vector<double> u(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<double> v(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<Index> match(static_cast<std::size_t>(m + 1), 0);  // column -> row
  for (Index i = 1; i <= m; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1),
                             std::numeric_limits<double>::infinity());
    std::vector<Index> way(static_cast<std::size_t>(m + 1), 0);
    std::vector<char> used(static_cast<std::size_t>(m + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = std::numeric_limits<double>::infinity();
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cost = shift - score(i0 - 1, j - 1);
        const double cur = cost - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(m), 0);
  for (Index j = 1; j <= m; ++j) {
    if (match[static_cast<std::size_t>(j)] > 0) {
      row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] =
          static_cast<int>(j - 1);
    }
  }
  return row_to_col;
}

}  // namespace detail

/// Fraction of agreeing nodes maximized over permutations of the predicted
/// cluster identities; exhaustive up to 8 clusters, Hungarian beyond.
inline double clustering_accuracy(const std::vector<int>& labels,
                                  const std::vector<int>& truth_labels) {
  require(labels.size() == truth_labels.size() && !labels.empty(),
          "clustering_accuracy: label vectors must match in length");
  int kmax = 0;
  for (int v : labels) kmax = std::max(kmax, v + 1);
  for (int v : truth_labels) kmax = std::max(kmax, v + 1);
  Matrix agree = Matrix::Zero(kmax, kmax);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    agree(labels[i], truth_labels[i]) += 1.0;
  }
  double best = 0.0;
  if (kmax <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(kmax));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (int c = 0; c < kmax; ++c) total += agree(c, perm[static_cast<std::size_t>(c)]);
      best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> assign = detail::max_assignment(agree);
    for (int c = 0; c < kmax; ++c) best += agree(c, assign[static_cast<std::size_t>(c)]);
  }
  return best / static_cast<double>(labels.size());
}

struct CentralityProfile {
  int degree = 0;
  double fraction_observed = 0.0;  // edges visible from this node's view
  double betweenness = 0.0;
  double closeness = 0.0;
  double eigenvector = 0.0;
};

/// Degree, Brandes betweenness (normalized by (n-1)(n-2)/2 over unordered
/// pairs), per-component closeness, unit-norm leading-eigenvector centrality,
/// and the fraction of edges observable from each node's 2-hop view.
inline std::vector<CentralityProfile> centralities(const AdjacencyMatrix& adj) {
  const Index n = adj.n;
  std::vector<CentralityProfile> prof(static_cast<std::size_t>(n));
  if (n == 0) return prof;

  std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(n));
  Index edge_count = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (adj.A(i, j) == 1.0) nbrs[static_cast<std::size_t>(i)].push_back(j);
    }
    prof[static_cast<std::size_t>(i)].degree =
        static_cast<int>(nbrs[static_cast<std::size_t>(i)].size());
    edge_count += static_cast<Index>(nbrs[static_cast<std::size_t>(i)].size());
  }
  edge_count /= 2;

  // Brandes accumulation; visits each ordered pair, halved afterwards.
  std::vector<double> bc(static_cast<std::size_t>(n), 0.0);
  std::vector<double> closeness_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> component_size(static_cast<std::size_t>(n), 1);
  for (Index s = 0; s < n; ++s) {
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n));
    std::vector<std::vector<Index>> preds(static_cast<std::size_t>(n));
    std::vector<double> sigma(static_cast<std::size_t>(n), 0.0);
    std::vector<Index> dist(static_cast<std::size_t>(n), -1);
    sigma[static_cast<std::size_t>(s)] = 1.0;
    dist[static_cast<std::size_t>(s)] = 0;
    std::queue<Index> q;
    q.push(s);
    while (!q.empty()) {
      const Index v = q.front();
      q.pop();
      order.push_back(v);
      for (Index w : nbrs[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          q.push(w);
        }
        if (dist[static_cast<std::size_t>(w)] ==
            dist[static_cast<std::size_t>(v)] + 1) {
          sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
          preds[static_cast<std::size_t>(w)].push_back(v);
        }
      }
    }
    std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Index w = *it;
      for (Index v : preds[static_cast<std::size_t>(w)]) {
        delta[static_cast<std::size_t>(v)] +=
            sigma[static_cast<std::size_t>(v)] / sigma[static_cast<std::size_t>(w)] *
            (1.0 + delta[static_cast<std::size_t>(w)]);
      }
      if (w != s) bc[static_cast<std::size_t>(w)] += delta[static_cast<std::size_t>(w)];
    }
    double dsum = 0.0;
    Index reached = 0;
    for (Index v = 0; v < n; ++v) {
      if (v != s && dist[static_cast<std::size_t>(v)] > 0) {
        dsum += static_cast<double>(dist[static_cast<std::size_t>(v)]);
        ++reached;
      }
    }
    closeness_sum[static_cast<std::size_t>(s)] = dsum;
    component_size[static_cast<std::size_t>(s)] = reached + 1;
  }
  const double pair_count = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (Index v = 0; v < n; ++v) {
    prof[static_cast<std::size_t>(v)].betweenness =
        pair_count > 0.0 ? bc[static_cast<std::size_t>(v)] / pair_count : 0.0;
    const double reach = static_cast<double>(component_size[static_cast<std::size_t>(v)] - 1);
    prof[static_cast<std::size_t>(v)].closeness =
        closeness_sum[static_cast<std::size_t>(v)] > 0.0
            ? reach / closeness_sum[static_cast<std::size_t>(v)]
            : 0.0;
  }

  // Leading eigenvector by power iteration, unit Euclidean norm.
  if (edge_count > 0) {
    Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (int iter = 0; iter < 10000; ++iter) {
      Vector next = adj.A * v;
      const double norm = next.norm();
      if (norm == 0.0) break;
      next /= norm;
      const double diff = (next - v).cwiseAbs().maxCoeff();
      v = std::move(next);
      if (diff < 1e-13) break;
    }
    v = v.cwiseAbs();
    for (Index i = 0; i < n; ++i) prof[static_cast<std::size_t>(i)].eigenvector = v(i);
  }

  if (edge_count > 0) {
    for (Index c = 0; c < n; ++c) {
      std::vector<char> in_set(static_cast<std::size_t>(n), 0);
      in_set[static_cast<std::size_t>(c)] = 1;
      for (Index j : nbrs[static_cast<std::size_t>(c)]) in_set[static_cast<std::size_t>(j)] = 1;
      Index seen = 0;
      for (Index i = 0; i < n; ++i) {
        for (Index j : nbrs[static_cast<std::size_t>(i)]) {
          if (j > i && (in_set[static_cast<std::size_t>(i)] || in_set[static_cast<std::size_t>(j)])) {
            ++seen;
          }
        }
      }
      prof[static_cast<std::size_t>(c)].fraction_observed =
          static_cast<double>(seen) / static_cast<double>(edge_count);
    }
  }
  return prof;
}

struct CorrelationPair {
  std::optional<double> pearson;
  std::optional<double> spearman;
};

namespace detail {

inline std::optional<double> pearson_of(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

/// Mid-ranks (ties get the average of their rank range), 1-based.
inline std::vector<double> midranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

inline CorrelationPair correlation_table(const std::vector<double>& x,
                                         const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 3,
          "correlation_table: need equal lengths >= 3");
  CorrelationPair c;
  c.pearson = detail::pearson_of(x, y);
  c.spearman = detail::pearson_of(detail::midranks(x), detail::midranks(y));
  return c;
}

}  // namespace egolsm
