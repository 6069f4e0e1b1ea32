#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <thread>

#include "egolsm/analysis.hpp"
#include "egolsm/graph_io.hpp"
#include "egolsm/init.hpp"
#include "egolsm/metrics.hpp"
#include "egolsm/version.hpp"

namespace egolsm {

/// Replicated studies over generated networks; real networks go through the
/// fit/analyze paths, which carry no ground truth.
struct ExperimentConfig {
  Index n = 1000;
  Index k = 3;
  Index center = 0;
  Scenario scenario = Scenario::imbalanced;
  double eta = 0.2;
  int iters = 500;
  ProjectionMode projection = ProjectionMode::practical;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 0;              // 0 = hardware concurrency
  bool cluster_accuracy = false;
  int kmeans_restarts = 50;
  InitConfig init;
  double init_scale_floor = 0.5;  // min ||Z0 Z0^T||_F as a fraction of n
  bool keep_fits = false;         // retain full traces per replicate
};

struct ReplicateRow {
  int replicate = 0;
  bool ok = false;
  std::string error;
  DiagnosticStats diag;
  ErrorReport err;
  double objective_final = 0.0;
  int iterations = 0;
  std::optional<double> accuracy;
  std::optional<FitResult> fit_detail;
};

struct ExperimentOutcome {
  std::vector<ReplicateRow> rows;
  int failures = 0;
};

namespace detail {

inline void parallel_for(int jobs, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (int j = 0; j < jobs; ++j) body(j);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int j = next.fetch_add(1); j < jobs; j = next.fetch_add(1)) body(j);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// One generated replicate: draw a truth and an adjacency, rewire the center
/// per the scenario, fit from the spectral initializer, and report error and
/// neighborhood diagnostics against the truth.
inline ReplicateRow run_generated_replicate(const ExperimentConfig& cfg,
                                            int replicate) {
  ReplicateRow row;
  row.replicate = replicate;
  try {
    const RngSpec gen_rng{cfg.seed, static_cast<std::uint64_t>(replicate) * 8 + 0};
    const RngSpec adj_rng{cfg.seed, static_cast<std::uint64_t>(replicate) * 8 + 1};
    const RngSpec scen_rng{cfg.seed, static_cast<std::uint64_t>(replicate) * 8 + 2};
    const RngSpec kmeans_rng{cfg.seed, static_cast<std::uint64_t>(replicate) * 8 + 3};
    const RngSpec fallback_rng{cfg.seed, static_cast<std::uint64_t>(replicate) * 8 + 4};

    GroundTruth truth = gen_mixture_truth(cfg.n, cfg.k, gen_rng);
    truth.scenario = cfg.scenario;
    AdjacencyMatrix A = sample_adjacency(truth.Theta_star, adj_rng);
    A = apply_scenario(A, cfg.center, cfg.scenario, scen_rng);
    const PartialView view = build_partial_view(A, cfg.center);

    InitConfig init_cfg = cfg.init;
    init_cfg.k = static_cast<int>(cfg.k);
    ParameterState init = initialize(view, truth.model.X, init_cfg);
    // The generator normalizes the latent part to ||Z* Z*^T||_F = n. When the
    // spectral initializer recovers clearly less latent mass than that (tiny
    // neighborhoods), the step size eta / (2 ||Z0||_op^2) runs far too hot, so
    // restore the known scale: pad degenerate directions with a deterministic
    // random spread and rescale.
    const double latent_mass = (init.Z * init.Z.transpose()).norm();
    const double target_mass = cfg.init_scale_floor * static_cast<double>(cfg.n);
    if (latent_mass < target_mass) {
      if (operator_norm(init.Z) == 0.0) {
        auto eng = fallback_rng.engine();
        std::normal_distribution<double> nrm(0.0, 1.0);
        Matrix Z0(cfg.n, cfg.k);
        for (Index i = 0; i < cfg.n; ++i) {
          for (Index c = 0; c < cfg.k; ++c) Z0(i, c) = nrm(eng);
        }
        init.Z = apply_centering(Z0, view);
      }
      init.Z *= std::sqrt(target_mass / (init.Z * init.Z.transpose()).norm());
    }

    SolverConfig solver_cfg;
    solver_cfg.eta = cfg.eta;
    solver_cfg.T = cfg.iters;
    solver_cfg.projection = cfg.projection;
    solver_cfg.track_truth = &truth;
    FitResult fit_result = fit(view, truth.model.X, init, solver_cfg);

    row.diag = neighborhood_diagnostics(truth, view);
    row.err = error_metric(fit_result.Z_hat, fit_result.alpha_hat,
                           fit_result.beta_hat, truth, view);
    row.objective_final = fit_result.objective_trace.back();
    row.iterations = fit_result.iterations_run;
    if (cfg.cluster_accuracy && !truth.labels.empty()) {
      const auto labels =
          kmeans_cluster(fit_result.Z_hat, 2, cfg.kmeans_restarts, kmeans_rng);
      row.accuracy = clustering_accuracy(labels, truth.labels);
    }
    if (cfg.keep_fits) row.fit_detail = std::move(fit_result);
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

inline ExperimentOutcome run_replicates(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  out.rows.resize(static_cast<std::size_t>(cfg.replicates));
  detail::parallel_for(cfg.replicates, cfg.threads, [&](int r) {
    out.rows[static_cast<std::size_t>(r)] = run_generated_replicate(cfg, r);
  });
  for (const auto& row : out.rows) {
    if (!row.ok) ++out.failures;
  }
  return out;
}

inline const char* to_string(ProjectionMode m) {
  return m == ProjectionMode::practical ? "practical" : "theoretical";
}

inline void write_replicate_csv(const std::vector<ReplicateRow>& rows,
                                const ExperimentConfig& cfg,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write results: " + path);
  out << "replicate,scenario,status,n,k,n_S,r_S,U_S,U_S_norm,gamma_S,"
         "kappa_prime,p_S,delta_n_sq,e_T,rel_error_theta,delta_theta_sq,"
         "delta_S_theta_sq,delta_G_sq,objective_final,iterations,accuracy,error\n";
  for (const auto& r : rows) {
    out << r.replicate << ',' << to_string(cfg.scenario) << ','
        << (r.ok ? "ok" : "failed") << ',' << cfg.n << ',' << cfg.k << ','
        << r.diag.n_S << ',' << detail::format_double(r.diag.r_S) << ','
        << detail::format_double(r.diag.U_S) << ','
        << detail::format_double(r.diag.U_S_normalized) << ','
        << detail::format_double(r.diag.gamma_S) << ','
        << detail::format_double(r.diag.kappa_prime) << ','
        << detail::format_double(r.diag.p_S) << ','
        << detail::format_double(r.diag.delta_n_sq) << ','
        << detail::format_double(r.err.e_t) << ','
        << detail::format_double(r.err.relative_error_Theta) << ','
        << detail::format_double(r.err.delta_Theta_F_sq) << ','
        << detail::format_double(r.err.delta_S_Theta_F_sq) << ','
        << detail::format_double(r.err.delta_G_F_sq) << ','
        << detail::format_double(r.objective_final) << ',' << r.iterations << ','
        << (r.accuracy ? detail::format_double(*r.accuracy) : "") << ','
        << (r.ok ? "" : r.error) << "\n";
  }
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["center"] = cfg.center;
  j["scenario"] = to_string(cfg.scenario);
  j["eta"] = cfg.eta;
  j["iters"] = cfg.iters;
  j["projection"] = to_string(cfg.projection);
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["kmeans_restarts"] = cfg.kmeans_restarts;
  j["cluster_accuracy"] = cfg.cluster_accuracy;
  j["usvt_threshold_const"] = cfg.init.usvt_threshold_const;
  j["prob_clip_eps"] = cfg.init.prob_clip_eps;
  j["init_scale_floor"] = cfg.init_scale_floor;
  return j;
}

/// Replicated study: one CSV row per replicate plus a JSON manifest that
/// suffices to reproduce the run. Returns the number of failed replicates.
inline int run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const ExperimentOutcome outcome = run_replicates(cfg);
  write_replicate_csv(outcome.rows, cfg,
                      cfg.out_dir + "/results.csv");
  nlohmann::json manifest;
  manifest["config"] = config_to_json(cfg);
  manifest["library_version"] = version_string;
  manifest["replicate_streams"] =
      "stream = 8*replicate + {0:truth,1:adjacency,2:scenario,3:kmeans,4:init fallback}";
  std::ofstream mf(cfg.out_dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";
  return outcome.failures;
}

}  // namespace egolsm
