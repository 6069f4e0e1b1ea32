#pragma once

#include <algorithm>
#include <utility>

#include "egolsm/model.hpp"

namespace egolsm {

/// The ego-centered observation of a network: the adjacency restricted to
/// pairs with at least one endpoint in the neighborhood set of the center.
/// The hidden block (non-neighbor x non-neighbor) is identically zero in B.
struct PartialView {
  Matrix B;                    // masked adjacency, symmetric, zero diagonal
  Index center = 0;
  IndexList members;           // sorted neighborhood set (center included)
  IndexList complement;        // sorted complement
  std::vector<char> in_set;    // indicator, length n
  Index n = 0;
  Index n_S = 0;
  double r_S = 0.0;
};

namespace detail {

inline PartialView finish_view(const Matrix& A, Index center,
                               std::vector<char> in_set) {
  const Index n = A.rows();
  PartialView v;
  v.center = center;
  v.in_set = std::move(in_set);
  v.n = n;
  for (Index i = 0; i < n; ++i) {
    (v.in_set[static_cast<std::size_t>(i)] ? v.members : v.complement)
        .push_back(i);
  }
  v.n_S = static_cast<Index>(v.members.size());
  v.r_S = static_cast<double>(v.n_S) / static_cast<double>(n);
  v.B = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const bool i_in = v.in_set[static_cast<std::size_t>(i)] != 0;
    for (Index j = 0; j < n; ++j) {
      if (i_in || v.in_set[static_cast<std::size_t>(j)]) v.B(i, j) = A(i, j);
    }
  }
  return v;
}

}  // namespace detail

/// Neighborhood set = direct neighbors of the center plus the center itself.
inline PartialView build_partial_view(const AdjacencyMatrix& adj, Index center) {
  const Index n = adj.n;
  if (center < 0 || center >= n) {
    throw std::out_of_range("build_partial_view: center index out of range");
  }
  std::vector<char> in_set(static_cast<std::size_t>(n), 0);
  in_set[static_cast<std::size_t>(center)] = 1;
  for (Index j = 0; j < n; ++j) {
    if (adj.A(center, j) == 1.0) in_set[static_cast<std::size_t>(j)] = 1;
  }
  return detail::finish_view(adj.A, center, std::move(in_set));
}

/// View with the mask disabled (every node observed); B equals A.
inline PartialView make_full_view(const AdjacencyMatrix& adj, Index center = 0) {
  std::vector<char> in_set(static_cast<std::size_t>(adj.n), 1);
  return detail::finish_view(adj.A, center, std::move(in_set));
}

/// View for an explicitly supplied neighborhood set (center must belong to it).
inline PartialView view_from_members(const AdjacencyMatrix& adj, Index center,
                                     const IndexList& members) {
  std::vector<char> in_set(static_cast<std::size_t>(adj.n), 0);
  for (Index i : members) {
    require(i >= 0 && i < adj.n, "view_from_members: index out of range");
    in_set[static_cast<std::size_t>(i)] = 1;
  }
  require(in_set[static_cast<std::size_t>(center)] != 0,
          "view_from_members: center must belong to the neighborhood set");
  return detail::finish_view(adj.A, center, std::move(in_set));
}

/// S(M) = SM + MS - SMS: keeps rows/columns indexed by the neighborhood set,
/// zeroes the hidden block.
inline Matrix mask_transform(const Matrix& M, const PartialView& view) {
  require(M.rows() == view.n && M.cols() == view.n,
          "mask_transform: matrix must be n x n");
  Matrix out = M;
  for (Index i : view.complement) {
    for (Index j : view.complement) out(i, j) = 0.0;
  }
  return out;
}

/// Zero the hidden block of M in place.
inline void mask_in_place(Matrix& M, const PartialView& view) {
  for (Index i : view.complement) {
    for (Index j : view.complement) M(i, j) = 0.0;
  }
}

/// JZ with J = I - W_S: removes the group mean of the neighbor rows and of the
/// non-neighbor rows separately, so both group sums vanish.
inline Matrix apply_centering(const Matrix& Z, const PartialView& view) {
  require(Z.rows() == view.n, "apply_centering: Z must have n rows");
  Matrix out = Z;
  if (!view.members.empty()) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(Z.cols());
    for (Index i : view.members) mean += Z.row(i);
    mean /= static_cast<double>(view.members.size());
    for (Index i : view.members) out.row(i) -= mean;
  }
  if (!view.complement.empty()) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(Z.cols());
    for (Index i : view.complement) mean += Z.row(i);
    mean /= static_cast<double>(view.complement.size());
    for (Index i : view.complement) out.row(i) -= mean;
  }
  return out;
}

inline Matrix select_rows(const Matrix& M, const IndexList& rows) {
  Matrix out(static_cast<Index>(rows.size()), M.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = M.row(rows[r]);
  return out;
}

inline Matrix select_submatrix(const Matrix& M, const IndexList& rows,
                               const IndexList& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Index>(r), static_cast<Index>(c)) = M(rows[r], cols[c]);
    }
  }
  return out;
}

struct SubmatrixViews {
  Matrix SS;        // rows in S, columns in S
  Matrix S_IS;      // rows in S, columns in complement
  Matrix IS_S;      // rows in complement, columns in S
  Matrix IS_IS;     // rows and columns in complement
  Matrix S_rows;    // rows in S, all columns
  Matrix IS_rows;   // rows in complement, all columns
};

inline SubmatrixViews submatrix_views(const Matrix& M, const PartialView& view) {
  SubmatrixViews s;
  s.SS = select_submatrix(M, view.members, view.members);
  s.S_IS = select_submatrix(M, view.members, view.complement);
  s.IS_S = select_submatrix(M, view.complement, view.members);
  s.IS_IS = select_submatrix(M, view.complement, view.complement);
  s.S_rows = select_rows(M, view.members);
  s.IS_rows = select_rows(M, view.complement);
  return s;
}

}  // namespace egolsm
