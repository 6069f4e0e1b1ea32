#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "egolsm/likelihood.hpp"
#include "egolsm/metrics.hpp"

namespace egolsm {

enum class ProjectionMode { practical, theoretical };

struct StepSizes {
  double eta_Z = 0.0;
  double eta_alpha_S = 0.0;
  double eta_alpha_IS = 0.0;
  double eta_beta = 0.0;
  bool beta_frozen = false;  // set when the masked covariates vanish
};

struct SolverConfig {
  double eta = 0.2;
  int T = 500;
  ProjectionMode projection = ProjectionMode::practical;
  ThetaBounds bounds;
  const GroundTruth* track_truth = nullptr;  // enables e_t tracing
  std::optional<double> stop_tol;  // relative objective change, 10 iterations in a row
};

struct ParameterState {
  Matrix Z;
  Vector alpha;
  double beta = 0.0;
};

struct FitResult {
  Matrix Z_hat;
  Vector alpha_hat;
  double beta_hat = 0.0;
  std::vector<double> objective_trace;      // length iterations_run + 1
  std::vector<double> e_t_trace;            // populated when truth is tracked
  std::vector<double> delta_G_sq_trace;     // ||ZZ^T - (JZ*)(JZ*)^T||_F^2
  std::vector<double> z_ratio_trace;        // ||dZ||_F / ||JZ*||_op
  int iterations_run = 0;
  StepSizes step_sizes;
};

/// eta_Z = eta / (2 ||Z0||_op^2), eta_alpha_S = eta / (4n),
/// eta_alpha_{I-S} = eta / (4 n_S), eta_beta = eta / (2 ||S(X)||_F^2).
/// A vanishing masked covariate matrix freezes beta instead of failing.
inline StepSizes compute_step_sizes(const Matrix& Z0, const PartialView& view,
                                    const Matrix& X, double eta) {
  require(eta > 0.0, "compute_step_sizes: eta must be positive");
  const double z_op = operator_norm(Z0);
  if (z_op == 0.0) {
    throw std::invalid_argument("compute_step_sizes: degenerate initialization (||Z0||_op = 0)");
  }
  StepSizes s;
  s.eta_Z = eta / (2.0 * z_op * z_op);
  s.eta_alpha_S = eta / (4.0 * static_cast<double>(view.n));
  s.eta_alpha_IS = eta / (4.0 * static_cast<double>(view.n_S));
  const double sx_sq = mask_transform(X, view).squaredNorm();
  if (sx_sq > 0.0) {
    s.eta_beta = eta / (2.0 * sx_sq);
  } else {
    s.eta_beta = 0.0;
    s.beta_frozen = true;
  }
  return s;
}

/// Practical mode re-centers Z by groups and leaves alpha, beta alone.
/// Theoretical mode additionally projects onto the constraint sets:
/// row norms of Z, the sup norm of alpha, and the covariate-scaled beta.
inline ParameterState project(ParameterState state, const PartialView& view,
                              const SolverConfig& config,
                              double max_abs_X = 0.0) {
  state.Z = apply_centering(state.Z, view);
  if (config.projection == ProjectionMode::theoretical) {
    const double row_cap = config.bounds.M1 / 3.0;
    for (Index i = 0; i < state.Z.rows(); ++i) {
      const double sq = state.Z.row(i).squaredNorm();
      if (sq > row_cap) state.Z.row(i) *= std::sqrt(row_cap / sq);
    }
    const double alpha_cap = config.bounds.M1 / 6.0;
    state.alpha = state.alpha.cwiseMax(-alpha_cap).cwiseMin(alpha_cap);
    if (max_abs_X > 0.0) {
      const double beta_cap = config.bounds.M1 / (3.0 * max_abs_X);
      state.beta = std::clamp(state.beta, -beta_cap, beta_cap);
    }
  }
  return state;
}

namespace detail {

inline double max_abs_offdiag(const Matrix& X) {
  double m = 0.0;
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      if (i != j) m = std::max(m, std::abs(X(i, j)));
    }
  }
  return m;
}

/// One gradient step from a precomputed Theta; every block update uses the
/// state that entered the iteration.
inline ParameterState step_from_theta(const ParameterState& state,
                                      const Matrix& theta, const Matrix& B,
                                      const Matrix& X, const PartialView& view,
                                      const StepSizes& steps,
                                      const SolverConfig& config,
                                      double max_abs_X, int iteration) {
  const Matrix R = masked_residual(B, theta, view);
  ParameterState next;
  next.Z = state.Z + 2.0 * steps.eta_Z * (R * state.Z);
  next.alpha = state.alpha;
  const Vector row_sums = R.rowwise().sum();
  for (Index i : view.members) {
    next.alpha(i) += 2.0 * steps.eta_alpha_S * row_sums(i);
  }
  // Rows of R outside S vanish off the observed columns, so the row sum is
  // exactly the residual against the neighborhood block.
  for (Index i : view.complement) {
    next.alpha(i) += 2.0 * steps.eta_alpha_IS * row_sums(i);
  }
  next.beta = state.beta;
  if (!steps.beta_frozen) {
    next.beta += steps.eta_beta * (R.cwiseProduct(X)).sum();
  }
  next = project(std::move(next), view, config, max_abs_X);
  if (!next.Z.allFinite() || !next.alpha.allFinite() ||
      !std::isfinite(next.beta)) {
    throw std::runtime_error(
        "pgd_step: non-finite update at iteration " + std::to_string(iteration) +
        " (step size too large?)");
  }
  return next;
}

}  // namespace detail

inline ParameterState pgd_step(const ParameterState& state, const Matrix& B,
                               const Matrix& X, const PartialView& view,
                               const StepSizes& steps,
                               const SolverConfig& config, int iteration = -1) {
  const Matrix theta = assemble_theta(state.alpha, state.beta, state.Z, X);
  return detail::step_from_theta(state, theta, B, X, view, steps, config,
                                 detail::max_abs_offdiag(X), iteration);
}

/// Projected gradient descent on the observed-data likelihood. Deterministic:
/// two runs with the same inputs produce identical traces.
inline FitResult fit(const PartialView& view, const Matrix& X,
                     const ParameterState& init, const SolverConfig& config) {
  require(init.Z.rows() == view.n, "fit: Z0 must have n rows");
  require(init.alpha.size() == view.n, "fit: alpha0 must have length n");
  require(X.rows() == view.n && X.cols() == view.n, "fit: X must be n x n");
  require(config.T >= 1, "fit: T must be at least 1");

  FitResult result;
  result.step_sizes = compute_step_sizes(init.Z, view, X, config.eta);
  const double max_abs_X = detail::max_abs_offdiag(X);

  std::optional<TruthTracker> tracker;
  if (config.track_truth != nullptr) {
    tracker.emplace(*config.track_truth, view);
  }

  ParameterState state = init;
  int streak = 0;
  int updates = 0;
  for (int t = 0;; ++t) {
    const Matrix theta = assemble_theta(state.alpha, state.beta, state.Z, X);
    const double obj = neg_log_likelihood(view.B, theta, view);
    if (tracker) {
      result.e_t_trace.push_back(tracker->e_t(state.Z, state.alpha, state.beta));
      result.delta_G_sq_trace.push_back(tracker->delta_G_centered_sq(state.Z));
      result.z_ratio_trace.push_back(tracker->z_ratio(state.Z));
    }
    if (!result.objective_trace.empty() && config.stop_tol) {
      const double prev = result.objective_trace.back();
      const double rel = std::abs(obj - prev) / std::max(std::abs(prev), 1e-300);
      streak = rel < *config.stop_tol ? streak + 1 : 0;
    }
    result.objective_trace.push_back(obj);
    if (t == config.T || (config.stop_tol && streak >= 10)) break;
    state = detail::step_from_theta(state, theta, view.B, X, view,
                                    result.step_sizes, config, max_abs_X, t);
    ++updates;
  }

  result.Z_hat = std::move(state.Z);
  result.alpha_hat = std::move(state.alpha);
  result.beta_hat = state.beta;
  result.iterations_run = updates;
  return result;
}

}  // namespace egolsm
