#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gnep/harness.hpp"
#include "gnep/io.hpp"
#include "support.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gnep;

namespace {

std::shared_ptr<const Problem> scalar_problem() {
  ConstraintSet cs;
  cs.add_inequality(testing::affine({{0, 1.0}}, 0.0));
  return std::make_shared<const Problem>(Problem{testing::unit_quadratic(), cs, {}});
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "gnep_harness_test" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.num_runs = 0;
  CHECK_THROWS_AS(cfg.validate(), StructuralError);
  cfg = {};
  cfg.steady_window = 0.6;
  CHECK_THROWS_AS(cfg.validate(), StructuralError);
  cfg.steady_window = 0.0;
  CHECK_THROWS_AS(cfg.validate(), StructuralError);
  cfg = {};
  cfg.mu = {0.003, -1};
  CHECK_THROWS_AS(cfg.validate(), StructuralError);
  cfg = {};
  cfg.algorithm = Algorithm::AH;
  cfg.mu = std::vector<double>(20, 0.003);
  CHECK_THROWS_AS(cfg.validate(), StructuralError);
  CHECK_NOTHROW(ExperimentConfig{}.validate());
  CHECK(algorithm_from_string("tik") == Algorithm::TIK);
  CHECK_THROWS_AS(algorithm_from_string("newton"), StructuralError);
}

TEST_CASE("noise-free contraction decays to zero MSD") {
  ExperimentConfig cfg;
  cfg.problem = scalar_problem();
  cfg.algorithm = Algorithm::ATP;
  cfg.mu = {0.03};
  cfg.rho = 10;
  cfg.num_runs = 1;
  cfg.num_iters = 400;
  cfg.w0 = Vector::Constant(1, 5.0);
  auto r = run_experiment(cfg);
  CHECK_FALSE(r.failed);
  CHECK(r.condition_violated.empty());
  CHECK(r.kappa < 1.0);
  CHECK(r.msd.back() < 1e-18);
  for (std::size_t i = 1; i < r.msd.size(); ++i) CHECK(r.msd[i] <= r.msd[i - 1]);
  // the fixed point, not w*, is the reference for the two-step methods
  CHECK(r.bias > 0.0);
  CHECK(std::abs((r.reference - r.w_star).norm() - r.bias) <= 1e-15);
}

TEST_CASE("MSD is nonnegative and monotone in mu on the evaluation network") {
  ExperimentConfig cfg;
  cfg.num_runs = 200;
  cfg.num_iters = 3000;
  cfg.mu = {0.003};
  auto lo = run_experiment(cfg);
  cfg.mu = {0.006};
  auto hi = run_experiment(cfg);
  for (const auto* r : {&lo, &hi}) {
    CHECK_FALSE(r->failed);
    CHECK(std::isfinite(r->steady_msd));
    for (double v : r->msd) CHECK(v >= 0.0);
  }
  CHECK(lo.steady_msd < hi.steady_msd);
}

TEST_CASE("SG fails at mu = 0.0065 while the two-step methods do not") {
  ExperimentConfig cfg;
  cfg.num_runs = 20;
  cfg.num_iters = 3000;
  cfg.mu = {0.0065};
  cfg.algorithm = Algorithm::SG;
  auto sg = run_experiment(cfg);
  CHECK(sg.failed);
  CHECK(sg.diverged_runs.size() > 10);
  CHECK(sg.diverged_runs.size() == sg.divergence_iterations.size());
  for (auto a : {Algorithm::ATP, Algorithm::PTA}) {
    cfg.algorithm = a;
    auto r = run_experiment(cfg);
    CHECK_FALSE(r.failed);
    CHECK(std::isfinite(r.steady_msd));
  }
}

TEST_CASE("results do not depend on the thread count") {
  for (auto a : {Algorithm::PTA, Algorithm::TIK}) {
    ExperimentConfig cfg;
    cfg.algorithm = a;
    cfg.num_runs = 13;
    cfg.num_iters = 500;
    cfg.seed = 7;
    auto serial = run_experiment(cfg);
    cfg.threads = 4;
    auto parallel = run_experiment(cfg);
    CHECK(serial.msd == parallel.msd);
    CHECK(serial.steady_msd == parallel.steady_msd);
    cfg.threads = 1;
    CHECK(run_experiment(cfg).msd == serial.msd);
    cfg.seed = 8;
    CHECK(run_experiment(cfg).msd != serial.msd);
  }
}

TEST_CASE("steady-state window and thinning") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::SG;
  cfg.mu = {0.001};
  cfg.num_runs = 5;
  cfg.num_iters = 6000;
  cfg.thinning = 10;
  auto r = run_experiment(cfg);
  CHECK(r.iterations.front() == 0);
  CHECK(r.iterations[1] == 10);
  CHECK(r.iterations.back() == 6000);
  CHECK(r.msd.size() == r.iterations.size());
  // the transient estimate pushes the window past the trailing 10%
  CHECK(r.transient_iters > 5400);
  CHECK(r.steady_start >= r.transient_iters);
  CHECK(r.steady_start < r.transient_iters + 10);
  CHECK(std::isfinite(r.steady_msd));

  // a run shorter than the transient has no steady state
  cfg.num_iters = 1000;
  auto short_run = run_experiment(cfg);
  CHECK(std::isnan(short_run.steady_msd));
  CHECK_FALSE(short_run.warnings.empty());
}

TEST_CASE("baseline runs stay feasible") {
  ExperimentConfig cfg;
  cfg.num_runs = 10;
  cfg.num_iters = 1000;
  for (auto a : {Algorithm::AH, Algorithm::TIK}) {
    cfg.algorithm = a;
    auto r = run_experiment(cfg);
    CHECK_FALSE(r.failed);
    CHECK(r.min_component >= 0.0);
    CHECK(std::isnan(r.bias));
    CHECK(r.msd.back() >= 0.0);
  }
}

TEST_CASE("sweeps record failures and continue") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::SG;
  cfg.num_runs = 4;
  cfg.num_iters = 2000;
  auto rows = sweep(cfg, SweepParameter::mu, {0.001, 0.0065, -1.0, 0.002});
  REQUIRE(rows.size() == 4);
  CHECK_FALSE(rows[0].result.failed);
  CHECK(rows[1].result.failed);
  CHECK(rows[2].result.failed);
  CHECK_FALSE(rows[3].result.failed);
  CHECK(rows[3].param == 0.002);
  CHECK_THROWS_AS(sweep(cfg, SweepParameter::rho, {}), StructuralError);
}

TEST_CASE("CSV and sidecar output") {
  auto dir = scratch("out");
  ExperimentConfig cfg;
  cfg.num_runs = 3;
  cfg.num_iters = 50;
  cfg.seed = 12;
  auto r = run_experiment(cfg);
  write_curve_csv(dir / "curve.csv", r);
  write_sidecar(dir / "curve.json", cfg, {&r});
  std::string csv = slurp(dir / "curve.csv");
  CHECK(csv.rfind("iter,msd\n", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    CHECK(std::stoul(line.substr(0, comma)) == r.iterations[count]);
    CHECK(std::stod(line.substr(comma + 1)) == r.msd[count]);
    ++count;
  }
  CHECK(count == r.msd.size());

  Json j = read_json_file(dir / "curve.json");
  CHECK(j.at("config").at("seed") == 12);
  CHECK(j.at("config").at("algorithm") == "ATP");
  for (const char* key : {"nu", "delta", "delta_p", "alpha", "beta"}) CHECK(j.at("constants").contains(key));
  for (const char* key : {"sg_theorem2", "deterministic_theorem3", "stochastic_theorem4", "bias_theorem5"})
    CHECK(j.at("bounds").contains(key));
  CHECK(j.at("results")[0].at("bias") == doctest::Approx(r.bias));

  cfg.num_iters = 20;
  auto rows = sweep(cfg, SweepParameter::rho, {100, 200});
  write_sweep_csv(dir / "sweep.csv", rows);
  std::string sw = slurp(dir / "sweep.csv");
  CHECK(sw.rfind("param,steady_msd,bias\n", 0) == 0);
  CHECK(sw.find("\n100,") != std::string::npos);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::TIK;
  cfg.mu = {0.002};
  cfg.rho = 123;
  cfg.epsilon = 0.25;
  cfg.num_iters = 77;
  cfg.num_runs = 3;
  cfg.seed = 99;
  cfg.thinning = 2;
  Json j = config_to_json(cfg);
  ExperimentConfig back = config_from_json(j);
  CHECK(back.algorithm == Algorithm::TIK);
  CHECK(back.mu == cfg.mu);
  CHECK(back.rho == 123);
  CHECK(back.epsilon == 0.25);
  CHECK(back.num_iters == 77);
  CHECK(back.seed == 99);
  CHECK(back.cournot.has_value());
  CHECK(run_experiment(back).msd == run_experiment(cfg).msd);

  ExperimentConfig custom;
  custom.problem = scalar_problem();
  custom.mu = {0.01};
  custom.num_runs = 2;
  custom.num_iters = 30;
  ExperimentConfig back2 = config_from_json(config_to_json(custom));
  REQUIRE(back2.problem);
  CHECK(run_experiment(back2).msd == run_experiment(custom).msd);

  Json net = Json::parse(R"({"network": {"layout_seed": 3}, "mu": [0.001, 0.002], "runs": 2})");
  auto c3 = config_from_json(net);
  CHECK(c3.cournot->edges == paper_network(3).edges);
  CHECK(c3.mu.size() == 2);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"runs": 0})")), StructuralError);
}

TEST_CASE("analysis JSON") {
  ExperimentConfig cfg;
  Json j = Json::parse(analysis_json(cfg, 1000));
  CHECK(j.at("constants").at("nu").get<double>() >= 4.0 - 1e-12);
  CHECK(j.at("noise_empirical").at("samples") == 1000);
  CHECK(j.at("bounds").at("deterministic_theorem3").at("satisfied") == false);
}
