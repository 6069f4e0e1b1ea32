#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace egolsm;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("egolsm_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("edge list parsing") {
  TempDir dir;
  SUBCASE("three-node path, zero-based") {
    write_file(dir.file("p.edges"), "0 1\n1 2\n");
    const auto data = read_edge_list(dir.file("p.edges"));
    CHECK(data.adj.n == 3);
    CHECK(data.detected_base == IndexBase::zero);
    CHECK(data.adj.A(0, 1) == 1.0);
    CHECK(data.adj.A(1, 2) == 1.0);
    CHECK(data.adj.A(0, 2) == 0.0);
  }
  SUBCASE("duplicate edges collapse") {
    write_file(dir.file("d.edges"), "0 1\n1 0\n");
    const auto data = read_edge_list(dir.file("d.edges"));
    CHECK(data.adj.A.sum() == 2.0);  // one undirected edge
    CHECK(data.duplicate_edges == 1);
  }
  SUBCASE("self loops dropped with a count") {
    write_file(dir.file("s.edges"), "0 0\n0 1\n2 2\n");
    const auto data = read_edge_list(dir.file("s.edges"), IndexBase::zero,
                                     std::optional<Index>{3});
    CHECK(data.self_loops_dropped == 2);
    CHECK(data.adj.n == 3);
  }
  SUBCASE("non-integer token reports the line") {
    write_file(dir.file("bad.edges"), "0 1\n1 x\n");
    CHECK_THROWS_WITH_AS(read_edge_list(dir.file("bad.edges")),
                         doctest::Contains("line 2"), std::runtime_error);
  }
  SUBCASE("id beyond the declared size") {
    write_file(dir.file("n.edges"), "0 9\n");
    CHECK_THROWS_WITH_AS(read_edge_list(dir.file("n.edges"), IndexBase::zero,
                                        std::optional<Index>{4}),
                         doctest::Contains("out of range"), std::runtime_error);
  }
  SUBCASE("bundled karate club") {
    const auto data = read_edge_list(std::string(EGOLSM_DATA_DIR) + "/karate.edges");
    CHECK(data.adj.n == 34);
    CHECK(data.adj.A.sum() == 156.0);  // 78 undirected edges
    CHECK(data.detected_base == IndexBase::one);
    const auto labels = read_labels(std::string(EGOLSM_DATA_DIR) + "/karate.labels", 34);
    int flips = 0;
    for (int v : labels) flips += v;
    CHECK(flips == 18);
  }
}

TEST_CASE("covariate parsing") {
  TempDir dir;
  SUBCASE("dense table with a nonzero diagonal gets hollowed") {
    write_file(dir.file("x.csv"), "1, 2, 3\n2, 5, 4\n3, 4, 9\n");
    const Matrix X = read_covariates(dir.file("x.csv"), 3);
    CHECK(X.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(X(0, 1) == 2.0);
    CHECK(X(2, 1) == 4.0);
  }
  SUBCASE("asymmetric dense entries are averaged") {
    write_file(dir.file("a.csv"), "0 1 0\n3 0 0\n0 0 0\n");
    const Matrix X = read_covariates(dir.file("a.csv"), 3);
    CHECK(X(0, 1) == doctest::Approx(2.0));
    CHECK(X(1, 0) == doctest::Approx(2.0));
  }
  SUBCASE("triplets with only the upper half are mirrored") {
    write_file(dir.file("t.txt"), "0 1 2.5\n1 2 -1.0\n");
    const Matrix X = read_covariates(dir.file("t.txt"), 4, IndexBase::zero);
    CHECK(X(1, 0) == doctest::Approx(2.5));
    CHECK(X(2, 1) == doctest::Approx(-1.0));
    CHECK(X(0, 2) == 0.0);
    CHECK(X(3, 0) == 0.0);
  }
  SUBCASE("shape mismatch") {
    write_file(dir.file("m.csv"), "1 2\n3 4\n");
    CHECK_THROWS(read_covariates(dir.file("m.csv"), 3));
  }
}

TEST_CASE("positions round-trip bit-exactly") {
  TempDir dir;
  FitResult fit;
  auto eng = RngSpec{95, 0}.engine();
  fit.Z_hat = testing::random_matrix(7, 2, eng);
  fit.alpha_hat = testing::random_matrix(7, 1, eng).col(0);
  fit.beta_hat = -0.123456789123456789;
  fit.objective_trace = {10.0, 9.0};
  const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0};
  emit_positions(fit, &labels, dir.file("pos.csv"), 1);
  const auto [Z, alpha] = read_positions(dir.file("pos.csv"));
  CHECK((Z - fit.Z_hat).cwiseAbs().maxCoeff() == 0.0);
  CHECK((alpha - fit.alpha_hat).cwiseAbs().maxCoeff() == 0.0);
  const std::string sidecar = read_file(dir.file("pos.csv") + ".meta.json");
  CHECK(sidecar.find("beta_hat") != std::string::npos);
  const std::string body = read_file(dir.file("pos.csv"));
  CHECK(body.find("node_id,z_1,z_2,alpha_hat,label") == 0);
}

TEST_CASE("replicated experiments") {
  SUBCASE("full scenario reports r_S = 1 on every replicate") {
    ExperimentConfig cfg;
    cfg.n = 40;
    cfg.k = 2;
    cfg.replicates = 2;
    cfg.iters = 20;
    cfg.scenario = Scenario::full;
    cfg.seed = 9;
    cfg.threads = 1;
    const auto out = run_replicates(cfg);
    for (const auto& row : out.rows) {
      REQUIRE(row.ok);
      CHECK(row.diag.r_S == 1.0);
    }
  }
  SUBCASE("same seed reproduces the result file byte for byte") {
    TempDir dir1, dir2;
    ExperimentConfig cfg;
    cfg.n = 40;
    cfg.k = 2;
    cfg.replicates = 3;
    cfg.iters = 25;
    cfg.scenario = Scenario::balanced;
    cfg.seed = 77;
    cfg.threads = 2;
    cfg.out_dir = dir1.path.string();
    CHECK(run_experiment(cfg) == 0);
    cfg.out_dir = dir2.path.string();
    CHECK(run_experiment(cfg) == 0);
    CHECK(read_file(dir1.file("results.csv")) == read_file(dir2.file("results.csv")));
    CHECK(read_file(dir1.file("results.csv")).find("replicate,scenario,status") == 0);
    CHECK(!read_file(dir1.file("manifest.json")).empty());
  }
  SUBCASE("failing replicates are recorded and counted") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.n = 41;  // generator requires an even node count
    cfg.k = 2;
    cfg.replicates = 2;
    cfg.iters = 5;
    cfg.seed = 1;
    cfg.threads = 1;
    cfg.out_dir = dir.path.string();
    const int failures = run_experiment(cfg);
    CHECK(failures == 2);
    const std::string body = read_file(dir.file("results.csv"));
    CHECK(body.find("failed") != std::string::npos);
  }
}
