#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "plsm/io.hpp"
#include "plsm/metrics.hpp"
#include "plsm/simulator.hpp"
#include "test_support.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace plsm;
using namespace plsm::testing;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("plsm_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("network files round-trip") {
  TempDir dir;
  Rng rng(3);
  const MultiEdgeNetwork net = random_network(7, 3, 3, rng);
  const std::string p1 = dir.file("net.txt");
  const std::string p2 = dir.file("net2.txt");
  io::write_network(net, p1);
  const MultiEdgeNetwork back = io::read_network(p1);
  CHECK(back == net);
  io::write_network(back, p2);
  CHECK(slurp(p1) == slurp(p2));  // canonical bytes
}

TEST_CASE("network reader fills omitted pairs with the zero-row convention") {
  TempDir dir;
  const std::string path = dir.file("sparse.txt");
  {
    std::ofstream out(path);
    out << "PLSMNET 1\n3 2 1\n0 2 2\n1 0\n0 1\n";
  }
  const MultiEdgeNetwork net = io::read_network(path);
  CHECK(net.n == 3);
  CHECK(net.m(pair_index(3, 0, 1)) == 1);
  CHECK(net.pairs[pair_index(3, 0, 1)].sum() == 0);
  CHECK(net.m(pair_index(3, 0, 2)) == 2);
  CHECK(net.pairs[pair_index(3, 0, 2)](0, 0) == 1);
}

TEST_CASE("network reader rejects malformed files") {
  TempDir dir;
  const auto write_and_read = [&](const std::string& body) {
    const std::string path = dir.file("bad.txt");
    std::ofstream(path) << body;
    return io::read_network(path);
  };
  CHECK_THROWS_AS(write_and_read("BOGUS 1\n2 1 0\n"), io::FileFormatError);
  CHECK_THROWS_AS(write_and_read("PLSMNET 1\n2 1 1\n1 0 1\n0\n"),
                  io::FileFormatError);  // j <= i
  CHECK_THROWS_AS(write_and_read("PLSMNET 1\n2 1 1\n0 1 1\n2\n"),
                  io::FileFormatError);  // digit out of range
  CHECK_THROWS_AS(write_and_read("PLSMNET 1\n2 1 1\n0 1 1\n0 1\n"),
                  io::FileFormatError);  // too many digits
  CHECK_THROWS_AS(write_and_read("PLSMNET 1\n3 1 2\n0 2 1\n0\n0 1 1\n0\n"),
                  io::FileFormatError);  // out of order
  CHECK_THROWS_AS(io::read_network(dir.file("missing.txt")),
                  io::FileFormatError);
}

TEST_CASE("model files round-trip bitwise") {
  TempDir dir;
  ModelParams p;
  p.a.resize(3);
  p.a << -1.2345678901234567, 1e-300, -0.0;
  p.W = Mat::Zero(3, 2);
  p.W(0, 1) = 2.5000000000000004;
  p.W(2, 0) = 1.7976931348623157e308;
  p.U.resize(3, 2);
  p.U << 1.0, 0.0, 0.6, 0.8, -0.12345678912345678, 0.99234999999999995;

  const std::string path = dir.file("model.txt");
  io::write_model(p, {{"seed", "42"}, {"note", "fit of run 7"}}, path);
  const io::ModelFile file = io::read_model(path);
  CHECK(file.params.a == p.a);
  CHECK(file.params.W == p.W);
  CHECK(file.params.U == p.U);
  CHECK(file.meta.at("seed") == "42");
  CHECK(file.meta.at("note") == "fit of run 7");

  const std::string again = dir.file("model2.txt");
  io::write_model(file.params, file.meta, again);
  CHECK(slurp(path) == slurp(again));

  ModelParams bad = p;
  bad.W(1, 1) = -0.5;
  CHECK_THROWS_AS(io::write_model(bad, {}, dir.file("bad.txt")),
                  std::invalid_argument);
}

TEST_CASE("holdout_mask removes the rounded per-layer share") {
  Rng rng(7);
  const MultiEdgeNetwork net = random_network(8, 4, 3, rng);
  const ObservationMask held = io::holdout_mask(net, 0.2, 99);
  const std::size_t per_layer = net.total_cells() / net.K;
  for (int k = 0; k < net.K; ++k) {
    std::size_t cnt = 0;
    for (const auto& block : held.blocks) {
      cnt += (block.col(k).array() > 0).count();
    }
    CHECK(cnt == static_cast<std::size_t>(std::lround(0.2 * per_layer)));
  }
  // deterministic
  const ObservationMask again = io::holdout_mask(net, 0.2, 99);
  CHECK(held.count() == again.count());
  std::size_t same = 0;
  for (std::size_t p = 0; p < held.blocks.size(); ++p) {
    same += (held.blocks[p] == again.blocks[p]);
  }
  CHECK(same == held.blocks.size());
}

TEST_CASE("predictions round-trip") {
  TempDir dir;
  const std::vector<io::Prediction> preds = {
      {0, 1, 0, 3, 0.12345678901234567}, {2, 5, 1, 0, 0.5}};
  const std::string path = dir.file("pred.csv");
  io::write_predictions(preds, path);
  const auto back = io::read_predictions(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].i == 0);
  CHECK(back[0].k == 3);
  CHECK(back[0].prob == preds[0].prob);
  CHECK(back[1].j == 5);
}

TEST_CASE("trace and pr and cv writers emit stable headers") {
  TempDir dir;
  FitReport rep;
  rep.objective = {10.0, 9.0};
  rep.steps = {{0.5, 0.25, 0.125}};
  rep.e_t = {2.0, 1.0};
  io::write_trace(rep, dir.file("trace.csv"));
  const std::string trace = slurp(dir.file("trace.csv"));
  CHECK(trace.rfind("iter,objective,eta_a,eta_w,eta_u,e_t\n", 0) == 0);

  PrCurve curve;
  curve.points = {{0.5, 1.0, 0.75}};
  curve.auc = 0.9;
  io::write_pr(curve, dir.file("pr.csv"));
  CHECK(slurp(dir.file("pr.csv")) ==
        "threshold,precision,recall\n0.5,1,0.75\n");

  CvResult cv;
  cv.grid.push_back({1, 5, {2.0, 3.0}, 2.5, false});
  cv.grid.push_back({2, 5, {1.0, 2.0}, 1.5, false});
  cv.best_d = 2;
  cv.best_s = 5;
  io::write_cv(cv, 2, dir.file("cv.csv"));
  const std::string cvtext = slurp(dir.file("cv.csv"));
  CHECK(cvtext.rfind("d,s,mean_deviance,selected,dev_fold0,dev_fold1\n", 0) ==
        0);
  CHECK(cvtext.find("2,5,1.5,1,1,2") != std::string::npos);
}

TEST_CASE("quantile interpolates between order statistics") {
  CHECK(io::quantile({1.0, 2.0, 3.0, 4.0}, 0.5) ==
        doctest::Approx(2.5).epsilon(1e-14));
  CHECK(io::quantile({3.0, 1.0, 2.0}, 0.0) == 1.0);
  CHECK(io::quantile({3.0, 1.0, 2.0}, 1.0) == 3.0);
  CHECK(io::quantile({5.0}, 0.975) == 5.0);
  CHECK_THROWS_AS(io::quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("experiment table aggregates are recomputable from raw rows") {
  io::ExperimentTable table;
  table.columns = {"x", "y"};
  table.rows = {{"K=10", 1, {1.0, 10.0}},
                {"K=10", 2, {3.0, 30.0}},
                {"K=20", 3, {5.0, 50.0}}};
  CHECK(table.aggregate("K=10", "x", "mean") == 2.0);
  CHECK(table.aggregate("K=10", "y", "q025") ==
        doctest::Approx(10.0 + 0.025 * 20.0).epsilon(1e-12));
  CHECK(table.settings() == std::vector<std::string>{"K=10", "K=20"});

  TempDir dir;
  io::write_experiment_table(table, dir.file("table.csv"));
  const std::string text = slurp(dir.file("table.csv"));
  CHECK(text.rfind("kind,setting,seed,x,y\n", 0) == 0);
  CHECK(text.find("raw,K=10,1,1,10") != std::string::npos);
  CHECK(text.find("mean,K=20,,5,50") != std::string::npos);
}
