// Command-line workbench for ego-centered latent space estimation:
//   simulate    generate a ground-truth model and a sampled network
//   fit         estimate latent positions from one network and center
//   analyze     per-center accuracy, centralities, imbalance, correlations
//   experiment  replicated simulation studies with CSV output
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <vector>

#include "egolsm/egolsm.hpp"

using namespace egolsm;

namespace {

std::string fmt(double v) { return detail::format_double(v); }

Scenario parse_scenario(const std::string& s) {
  if (s == "imbalanced") return Scenario::imbalanced;
  if (s == "balanced") return Scenario::balanced;
  if (s == "full") return Scenario::full;
  throw CLI::ValidationError("--scenario", "must be imbalanced, balanced or full");
}

ProjectionMode parse_projection(const std::string& s) {
  if (s == "practical") return ProjectionMode::practical;
  if (s == "theoretical") return ProjectionMode::theoretical;
  throw CLI::ValidationError("--projection", "must be practical or theoretical");
}

struct CommonOpts {
  std::string network, covariates, labels;
  long long center = 1;
  std::string scenario = "imbalanced";
  Index k = 2;
  double eta = 0.2;
  int iters = 500;
  std::string projection = "practical";
  std::uint64_t seed = 0;
  std::string out = "out";
  double usvt_const = 1.4;
  double clip_eps = 1e-3;
};

void add_solver_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--k", o.k, "latent dimension")->capture_default_str();
  cmd->add_option("--eta", o.eta, "base step size")->capture_default_str();
  cmd->add_option("--iters", o.iters, "gradient iterations")->capture_default_str();
  cmd->add_option("--projection", o.projection, "practical|theoretical")->capture_default_str();
  cmd->add_option("--seed", o.seed, "rng seed")->capture_default_str();
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--usvt-const", o.usvt_const, "spectral threshold multiplier")->capture_default_str();
  cmd->add_option("--clip-eps", o.clip_eps, "probability clipping for the initializer")->capture_default_str();
}

struct LoadedNetwork {
  AdjacencyMatrix adj;
  Matrix X;
  long long id_offset = 0;  // file ids minus internal ids
  std::vector<int> labels;
};

LoadedNetwork load_network(const CommonOpts& o, bool want_labels) {
  LoadedNetwork net{{}, {}, 0, {}};
  auto data = read_edge_list(o.network);
  net.id_offset = data.detected_base == IndexBase::one ? 1 : 0;
  if (data.self_loops_dropped > 0) {
    std::cerr << "warning: dropped " << data.self_loops_dropped << " self-loops\n";
  }
  net.adj = std::move(data.adj);
  if (!o.covariates.empty()) {
    net.X = read_covariates(o.covariates, net.adj.n);
  } else {
    net.X = Matrix::Zero(net.adj.n, net.adj.n);
  }
  if (want_labels && !o.labels.empty()) {
    net.labels = read_labels(o.labels, net.adj.n);
  }
  return net;
}

FitResult fit_center(const LoadedNetwork& net, const PartialView& view, const CommonOpts& o) {
  InitConfig init_cfg;
  init_cfg.k = static_cast<int>(o.k);
  init_cfg.usvt_threshold_const = o.usvt_const;
  init_cfg.prob_clip_eps = o.clip_eps;
  const auto init = initialize(view, net.X, init_cfg);
  SolverConfig config;
  config.eta = o.eta;
  config.T = o.iters;
  config.projection = parse_projection(o.projection);
  const auto steps = compute_step_sizes(init.Z, view, net.X, o.eta);
  if (steps.beta_frozen && !net.X.isZero(0.0)) {
    std::cerr << "warning: masked covariates vanish, beta is frozen at its initial value\n";
  }
  return fit(view, net.X, init, config);
}

int cmd_simulate(const CommonOpts& o, Index n) {
  std::filesystem::create_directories(o.out);
  const auto truth = gen_mixture_truth(n, o.k, RngSpec{o.seed, 0});
  auto A = sample_adjacency(truth.Theta_star, RngSpec{o.seed, 1});
  A = apply_scenario(A, 0, parse_scenario(o.scenario), RngSpec{o.seed, 2});

  std::ofstream edges(o.out + "/network.edges");
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (A.A(i, j) == 1.0) edges << i << " " << j << "\n";
    }
  }
  std::ofstream cov(o.out + "/covariates.csv");
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      cov << fmt(truth.model.X(i, j)) << (j + 1 < n ? "," : "");
    }
    cov << "\n";
  }
  std::ofstream lab(o.out + "/labels.txt");
  for (Index i = 0; i < n; ++i) lab << i << " " << truth.labels[static_cast<std::size_t>(i)] << "\n";

  nlohmann::json tj;
  tj["n"] = n;
  tj["k"] = o.k;
  tj["beta"] = truth.model.beta;
  tj["seed"] = o.seed;
  tj["scenario"] = o.scenario;
  std::vector<double> alpha(truth.model.alpha.data(), truth.model.alpha.data() + n);
  tj["alpha"] = alpha;
  std::vector<std::vector<double>> Z;
  for (Index i = 0; i < n; ++i) {
    Z.emplace_back(truth.model.Z.row(i).data(), truth.model.Z.row(i).data() + o.k);
  }
  tj["Z"] = Z;
  std::ofstream tf(o.out + "/truth.json");
  tf << tj.dump() << "\n";
  std::cout << "wrote network.edges, covariates.csv, labels.txt, truth.json to " << o.out << "\n";
  return 0;
}

int cmd_fit(const CommonOpts& o, bool full_view) {
  const auto net = load_network(o, false);
  AdjacencyMatrix A = net.adj;
  const Index center = static_cast<Index>(o.center - net.id_offset);
  if (o.scenario != "imbalanced") {
    A = apply_scenario(A, center, parse_scenario(o.scenario), RngSpec{o.seed, 2});
  }
  const PartialView view = full_view ? make_full_view(A, center) : build_partial_view(A, center);
  std::cout << "center " << o.center << ": neighborhood size " << view.n_S << " of " << view.n
            << " (ratio " << view.r_S << ")\n";
  const auto res = fit_center({A, net.X, net.id_offset, {}}, view, o);
  std::filesystem::create_directories(o.out);
  emit_positions(res, nullptr, o.out + "/positions.csv", net.id_offset);
  nlohmann::json j;
  j["center"] = o.center;
  j["n_S"] = view.n_S;
  j["r_S"] = view.r_S;
  j["beta_hat"] = res.beta_hat;
  j["objective_initial"] = res.objective_trace.front();
  j["objective_final"] = res.objective_trace.back();
  j["iterations_run"] = res.iterations_run;
  std::ofstream sf(o.out + "/fit.json");
  sf << j.dump(2) << "\n";
  std::cout << "objective " << res.objective_trace.front() << " -> " << res.objective_trace.back()
            << ", beta_hat = " << res.beta_hat << "\n";
  std::cout << "wrote positions.csv and fit.json to " << o.out << "\n";
  return 0;
}

int cmd_analyze(const CommonOpts& o, const std::string& centers_arg, int min_degree,
                int restarts) {
  const auto net = load_network(o, true);
  const Index n = net.adj.n;
  const auto prof = centralities(net.adj);

  std::vector<Index> centers;
  if (centers_arg == "all") {
    for (Index i = 0; i < n; ++i) {
      if (prof[static_cast<std::size_t>(i)].degree > min_degree) centers.push_back(i);
    }
  } else {
    std::string list = centers_arg;
    for (char& c : list) {
      if (c == ',') c = ' ';
    }
    std::istringstream iss(list);
    long long id = 0;
    while (iss >> id) centers.push_back(static_cast<Index>(id - net.id_offset));
  }

  // Full-network fit once, for the empirical imbalance of every center.
  const auto full_fit = fit_center(net, make_full_view(net.adj), o);
  const double g_norm = (full_fit.Z_hat * full_fit.Z_hat.transpose()).norm();

  const int K = [&] {
    int k = 2;
    for (int v : net.labels) k = std::max(k, v + 1);
    return k;
  }();

  std::filesystem::create_directories(o.out);
  std::ofstream csv(o.out + "/analyze.csv");
  csv << "center,degree,fraction_observed,betweenness,closeness,eigenvector,imbalance,accuracy\n";
  std::vector<double> acc_col, deg_col, frac_col, bet_col, clo_col, eig_col, imb_col;
  for (const Index c : centers) {
    const auto view = build_partial_view(net.adj, c);
    const auto& p = prof[static_cast<std::size_t>(c)];
    const double imb = imbalance(full_fit.Z_hat, view, g_norm).U_S_normalized;
    std::string acc_str;
    if (!net.labels.empty()) {
      try {
        const auto res = fit_center(net, view, o);
        const auto km = kmeans_cluster(res.Z_hat, K, restarts,
                                       RngSpec{o.seed, 7000 + static_cast<std::uint64_t>(c)});
        const double acc = clustering_accuracy(km, net.labels);
        acc_str = fmt(acc);
        acc_col.push_back(acc);
        deg_col.push_back(p.degree);
        frac_col.push_back(p.fraction_observed);
        bet_col.push_back(p.betweenness);
        clo_col.push_back(p.closeness);
        eig_col.push_back(p.eigenvector);
        imb_col.push_back(imb);
      } catch (const std::exception& e) {
        std::cerr << "center " << (c + net.id_offset) << ": " << e.what() << "\n";
      }
    }
    csv << (c + net.id_offset) << ',' << p.degree << ',' << fmt(p.fraction_observed) << ','
        << fmt(p.betweenness) << ',' << fmt(p.closeness) << ',' << fmt(p.eigenvector) << ','
        << fmt(imb) << ',' << acc_str << "\n";
  }

  if (acc_col.size() >= 3) {
    std::ofstream cor(o.out + "/correlations.csv");
    cor << "attribute,pearson,spearman\n";
    const std::pair<std::string, const std::vector<double>*> cols[] = {
        {"degree", &deg_col},       {"fraction_observed", &frac_col},
        {"betweenness", &bet_col},  {"closeness", &clo_col},
        {"eigenvector", &eig_col},  {"imbalance", &imb_col}};
    for (const auto& [name, col] : cols) {
      const auto corr = correlation_table(acc_col, *col);
      cor << name << ',' << (corr.pearson ? fmt(*corr.pearson) : "") << ','
          << (corr.spearman ? fmt(*corr.spearman) : "") << "\n";
    }
    std::cout << "wrote analyze.csv and correlations.csv to " << o.out << "\n";
  } else {
    std::cout << "wrote analyze.csv to " << o.out
              << " (no correlations: need labels and at least 3 analyzed centers)\n";
  }
  return 0;
}

/// Flat key=value configuration: each key names a long flag of the chosen
/// subcommand; explicit flags win over file values.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string config_path;
  for (auto it = args.begin(); it != args.end();) {
    if (*it == "--config" && std::next(it) != args.end()) {
      config_path = *std::next(it);
      it = args.erase(it, std::next(it, 2));
    } else if (it->rfind("--config=", 0) == 0) {
      config_path = it->substr(9);
      it = args.erase(it);
    } else {
      ++it;
    }
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file: " + config_path);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    }
    if (!present) args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ego-centered latent space model estimation workbench"};
  app.require_subcommand(1);

  CommonOpts o;
  Index sim_n = 1000;
  bool full_view = false;
  std::string centers_arg = "all";
  int min_degree = 3;
  int restarts = 50;
  ExperimentConfig exp_cfg;

  auto* simulate = app.add_subcommand("simulate", "generate a model and sample a network");
  simulate->add_option("--n", sim_n, "node count")->capture_default_str();
  simulate->add_option("--scenario", o.scenario, "imbalanced|balanced|full")->capture_default_str();
  add_solver_flags(simulate, o);

  auto* fitcmd = app.add_subcommand("fit", "fit one network from one center");
  fitcmd->add_option("--network", o.network, "edge list path")->required();
  fitcmd->add_option("--covariates", o.covariates, "covariate file (dense or triplets)");
  fitcmd->add_option("--center", o.center, "center node id (file convention)")->capture_default_str();
  fitcmd->add_option("--scenario", o.scenario, "imbalanced|balanced|full")->capture_default_str();
  fitcmd->add_flag("--full-view", full_view, "ignore the mask and fit the whole network");
  add_solver_flags(fitcmd, o);

  auto* analyze = app.add_subcommand("analyze", "centralities, imbalance and per-center accuracy");
  analyze->add_option("--network", o.network, "edge list path")->required();
  analyze->add_option("--covariates", o.covariates, "covariate file");
  analyze->add_option("--labels", o.labels, "ground-truth communities (node_id label)");
  analyze->add_option("--centers", centers_arg, "comma-separated ids or 'all'")->capture_default_str();
  analyze->add_option("--min-degree", min_degree, "degree cutoff when centers=all")->capture_default_str();
  analyze->add_option("--restarts", restarts, "k-means restarts")->capture_default_str();
  add_solver_flags(analyze, o);

  auto* experiment = app.add_subcommand("experiment", "replicated simulation study");
  experiment->add_option("--n", exp_cfg.n, "node count")->capture_default_str();
  experiment->add_option("--replicates", exp_cfg.replicates, "replicate count")->capture_default_str();
  experiment->add_option("--center", exp_cfg.center, "center node index")->capture_default_str();
  experiment->add_option("--scenario", o.scenario, "imbalanced|balanced|full")->capture_default_str();
  experiment->add_option("--threads", exp_cfg.threads, "parallel replicates (0 = auto)")->capture_default_str();
  experiment->add_flag("--accuracy", exp_cfg.cluster_accuracy, "also run k-means accuracy per replicate");
  add_solver_flags(experiment, o);

  for (auto* sub : {simulate, fitcmd, analyze, experiment}) {
    sub->add_option("--config", "flat key=value configuration file; flags override")
        ->type_name("FILE");
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, sim_n);
    if (fitcmd->parsed()) return cmd_fit(o, full_view);
    if (analyze->parsed()) return cmd_analyze(o, centers_arg, min_degree, restarts);
    if (experiment->parsed()) {
      exp_cfg.k = o.k;
      exp_cfg.scenario = parse_scenario(o.scenario);
      exp_cfg.eta = o.eta;
      exp_cfg.iters = o.iters;
      exp_cfg.projection = parse_projection(o.projection);
      exp_cfg.seed = o.seed;
      exp_cfg.out_dir = o.out;
      exp_cfg.init.k = static_cast<int>(o.k);
      exp_cfg.init.usvt_threshold_const = o.usvt_const;
      exp_cfg.init.prob_clip_eps = o.clip_eps;
      const int failures = run_experiment(exp_cfg);
      std::cout << "wrote results.csv and manifest.json to " << exp_cfg.out_dir
                << (failures > 0 ? " (" + std::to_string(failures) + " replicates failed)" : "")
                << "\n";
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
