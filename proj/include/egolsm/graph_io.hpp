#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "egolsm/solver.hpp"

namespace egolsm {

enum class IndexBase { detect, zero, one };

struct EdgeListData {
  AdjacencyMatrix adj;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges = 0;
  IndexBase detected_base = IndexBase::zero;
};

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
  std::string cleaned = line;
  for (char& c : cleaned) {
    if (c == ',' || c == '\t' || c == ';') c = ' ';
  }
  std::istringstream iss(cleaned);
  std::vector<std::string> tokens;
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

inline long long parse_int(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  long long value = 0;
  try {
    value = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size()) {
    throw std::runtime_error("edge list parse error at line " +
                             std::to_string(line_no) + ": non-integer token '" +
                             tok + "'");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Whitespace- or comma-delimited "u v" pairs, one edge per line; lines
/// starting with '#' or '%' are comments. With IndexBase::detect, a file whose
/// smallest id is 1 is treated as 1-based.
inline EdgeListData read_edge_list(const std::string& path,
                                   IndexBase base = IndexBase::detect,
                                   std::optional<Index> declared_n = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  std::vector<std::pair<long long, long long>> raw;
  long long min_id = std::numeric_limits<long long>::max();
  long long max_id = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    const auto toks = detail::split_tokens(line);
    if (toks.empty()) continue;
    if (toks.size() < 2) {
      throw std::runtime_error("edge list parse error at line " +
                               std::to_string(line_no) + ": expected two ids");
    }
    const long long u = detail::parse_int(toks[0], line_no);
    const long long v = detail::parse_int(toks[1], line_no);
    if (u < 0 || v < 0) {
      throw std::runtime_error("edge list parse error at line " +
                               std::to_string(line_no) + ": negative id");
    }
    raw.emplace_back(u, v);
    min_id = std::min({min_id, u, v});
    max_id = std::max({max_id, u, v});
  }
  if (raw.empty()) throw std::runtime_error("edge list is empty: " + path);

  IndexBase resolved = base;
  if (resolved == IndexBase::detect) {
    resolved = (min_id >= 1) ? IndexBase::one : IndexBase::zero;
  }
  const long long offset = (resolved == IndexBase::one) ? 1 : 0;
  const Index n =
      declared_n.value_or(static_cast<Index>(max_id - offset + 1));

  EdgeListData out;
  out.detected_base = resolved;
  out.adj.A = Matrix::Zero(n, n);
  out.adj.n = n;
  for (const auto& [u_raw, v_raw] : raw) {
    const long long u = u_raw - offset;
    const long long v = v_raw - offset;
    if (u >= n || v >= n || u < 0 || v < 0) {
      throw std::runtime_error("edge list node id out of range: " +
                               std::to_string(u_raw) + " " +
                               std::to_string(v_raw));
    }
    if (u == v) {
      ++out.self_loops_dropped;
      continue;
    }
    if (out.adj.A(u, v) == 1.0) {
      ++out.duplicate_edges;
      continue;
    }
    out.adj.A(u, v) = 1.0;
    out.adj.A(v, u) = 1.0;
  }
  return out;
}

/// Dense n x n table, or "i j x" triplets (ids in the same base convention as
/// the edge list). Symmetrized by averaging when both (i,j) and (j,i) appear;
/// the diagonal is forced to zero.
inline Matrix read_covariates(const std::string& path, Index n,
                              IndexBase base = IndexBase::detect) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open covariates: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    auto toks = detail::split_tokens(line);
    if (!toks.empty()) rows.push_back(std::move(toks));
  }
  if (rows.empty()) throw std::runtime_error("covariate file is empty: " + path);

  Matrix X = Matrix::Zero(n, n);
  const bool dense = rows[0].size() == static_cast<std::size_t>(n);
  if (dense) {
    if (rows.size() != static_cast<std::size_t>(n)) {
      throw std::runtime_error("covariates: dense table must have n rows");
    }
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        X(i, j) = std::stod(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      }
    }
    X = 0.5 * (X + X.transpose().eval());
  } else if (rows[0].size() == 3) {
    Matrix seen = Matrix::Zero(n, n);
    long long min_id = std::numeric_limits<long long>::max();
    std::vector<std::tuple<long long, long long, double>> trips;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const long long i = detail::parse_int(rows[r][0], r + 1);
      const long long j = detail::parse_int(rows[r][1], r + 1);
      trips.emplace_back(i, j, std::stod(rows[r][2]));
      min_id = std::min({min_id, i, j});
    }
    IndexBase resolved = base;
    if (resolved == IndexBase::detect) {
      resolved = (min_id >= 1) ? IndexBase::one : IndexBase::zero;
    }
    const long long offset = (resolved == IndexBase::one) ? 1 : 0;
    for (const auto& [i_raw, j_raw, x] : trips) {
      const long long i = i_raw - offset;
      const long long j = j_raw - offset;
      if (i < 0 || j < 0 || i >= n || j >= n) {
        throw std::runtime_error("covariates: index out of range");
      }
      X(i, j) += x;
      seen(i, j) += 1.0;
    }
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double count = seen(i, j) + seen(j, i);
        if (count > 0.0) {
          const double avg = (X(i, j) + X(j, i)) / count;
          X(i, j) = avg;
          X(j, i) = avg;
        }
      }
    }
  } else {
    throw std::runtime_error(
        "covariates: expected a dense n x n table or 'i j x' triplets");
  }
  X.diagonal().setZero();
  return X;
}

/// One "node_id label" pair per line.
inline std::vector<int> read_labels(const std::string& path, Index n,
                                    IndexBase base = IndexBase::detect) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels: " + path);
  std::vector<std::pair<long long, int>> raw;
  long long min_id = std::numeric_limits<long long>::max();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    const auto toks = detail::split_tokens(line);
    if (toks.size() < 2) continue;
    const long long id = detail::parse_int(toks[0], line_no);
    raw.emplace_back(id, static_cast<int>(detail::parse_int(toks[1], line_no)));
    min_id = std::min(min_id, id);
  }
  IndexBase resolved = base;
  if (resolved == IndexBase::detect) {
    resolved = (min_id >= 1) ? IndexBase::one : IndexBase::zero;
  }
  const long long offset = (resolved == IndexBase::one) ? 1 : 0;
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (const auto& [id, lab] : raw) {
    const long long i = id - offset;
    if (i < 0 || i >= n) throw std::runtime_error("labels: node id out of range");
    labels[static_cast<std::size_t>(i)] = lab;
  }
  return labels;
}

/// CSV of estimated positions (node_id, z_1..z_k, alpha_hat, optional label)
/// plus a JSON sidecar carrying beta_hat. Values are written with 17
/// significant digits so a reload reproduces them bit-exactly.
inline void emit_positions(const FitResult& fit, const std::vector<int>* labels,
                           const std::string& path, long long id_offset = 0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write positions: " + path);
  const Index n = fit.Z_hat.rows();
  const Index k = fit.Z_hat.cols();
  out << "node_id";
  for (Index c = 0; c < k; ++c) out << ",z_" << (c + 1);
  out << ",alpha_hat";
  if (labels != nullptr) out << ",label";
  out << "\n";
  for (Index i = 0; i < n; ++i) {
    out << (i + id_offset);
    for (Index c = 0; c < k; ++c) out << "," << detail::format_double(fit.Z_hat(i, c));
    out << "," << detail::format_double(fit.alpha_hat(i));
    if (labels != nullptr) out << "," << (*labels)[static_cast<std::size_t>(i)];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);

  nlohmann::json side;
  side["beta_hat"] = fit.beta_hat;
  side["k"] = k;
  side["n"] = n;
  side["iterations_run"] = fit.iterations_run;
  side["objective_final"] =
      fit.objective_trace.empty() ? 0.0 : fit.objective_trace.back();
  std::ofstream sidecar(path + ".meta.json");
  if (!sidecar) throw std::runtime_error("cannot write sidecar: " + path + ".meta.json");
  sidecar << side.dump(2) << "\n";
}

/// Reload of an emit_positions file (round-trip support).
inline std::pair<Matrix, Vector> read_positions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open positions: " + path);
  std::string header;
  std::getline(in, header);
  const auto cols = detail::split_tokens(header);
  Index k = 0;
  for (const auto& c : cols) {
    if (c.rfind("z_", 0) == 0) ++k;
  }
  std::vector<std::vector<double>> z_rows;
  std::vector<double> alphas;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto toks = detail::split_tokens(line);
    std::vector<double> z(static_cast<std::size_t>(k));
    for (Index c = 0; c < k; ++c) z[static_cast<std::size_t>(c)] = std::stod(toks[static_cast<std::size_t>(c + 1)]);
    z_rows.push_back(std::move(z));
    alphas.push_back(std::stod(toks[static_cast<std::size_t>(k + 1)]));
  }
  Matrix Z(static_cast<Index>(z_rows.size()), k);
  Vector alpha(static_cast<Index>(alphas.size()));
  for (std::size_t i = 0; i < z_rows.size(); ++i) {
    for (Index c = 0; c < k; ++c) Z(static_cast<Index>(i), c) = z_rows[i][static_cast<std::size_t>(c)];
    alpha(static_cast<Index>(i)) = alphas[i];
  }
  return {Z, alpha};
}

}  // namespace egolsm
