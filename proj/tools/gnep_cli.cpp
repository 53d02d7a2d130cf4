// gnep: analyze a configuration, run one Monte-Carlo experiment, or sweep mu/rho.
#include "gnep/harness.hpp"
#include "gnep/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace gnep;

namespace {

struct Options {
  std::string config;
  std::string algorithm;
  std::vector<double> mu;
  std::vector<double> rho;
  std::optional<double> epsilon;
  std::size_t runs = 0;
  std::size_t iters = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> layout_seed;
  std::size_t threads = 0;
  std::size_t thinning = 0;
  std::size_t noise_samples = 0;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--algorithm", o.algorithm, "SG, ATP, PTA, AH or TIK");
  cmd->add_option("--mu", o.mu, "step size (one value, or one per agent; several values sweep)");
  cmd->add_option("--rho", o.rho, "penalty parameter (several values sweep)");
  cmd->add_option("--epsilon", o.epsilon, "Tikhonov regularization (TIK only)");
  cmd->add_option("--runs", o.runs, "Monte-Carlo runs");
  cmd->add_option("--iters", o.iters, "iterations per run");
  cmd->add_option("--seed", o.seed, "experiment seed");
  cmd->add_option("--layout-seed", o.layout_seed, "seed of the generated Cournot network");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--thinning", o.thinning, "record every n-th iteration");
  cmd->add_option("--out", o.out, "output directory");
}

ExperimentConfig resolve(const Options& o, bool sweeping) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : config_from_json(read_json_file(o.config));
  if (o.layout_seed) {
    if (cfg.problem) throw CLI::ValidationError("--layout-seed", "config already defines a game");
    cfg.cournot = paper_network(*o.layout_seed);
  }
  if (!o.algorithm.empty()) cfg.algorithm = algorithm_from_string(o.algorithm);
  if (!o.mu.empty() && !(sweeping && o.mu.size() > 1)) cfg.mu = o.mu;
  if (!o.rho.empty() && !(sweeping && o.rho.size() > 1)) {
    if (o.rho.size() > 1) throw CLI::ValidationError("--rho", "takes one value outside sweep");
    cfg.rho = o.rho.front();
  }
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.runs) cfg.num_runs = o.runs;
  if (o.iters) cfg.num_iters = o.iters;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = o.threads;
  if (o.thinning) cfg.thinning = o.thinning;
  cfg.validate();
  return cfg;
}

void report(const ExperimentResult& r) {
  std::cout << to_string(r.config.algorithm) << " mu=" << r.config.mu.front() << " rho=" << r.config.rho
            << " steady_msd=" << r.steady_msd << " bias=" << r.bias;
  if (r.failed) std::cout << " FAILED (" << r.failure << ")";
  if (!r.condition_violated.empty()) std::cout << " [theorem condition violated: " << r.condition_violated << "]";
  std::cout << '\n';
  for (const auto& w : r.warnings) std::cout << "  warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized learning for stochastic generalized Nash games"};
  app.require_subcommand(1);
  Options o;

  auto* analyze = app.add_subcommand("analyze", "print constants and step-size bounds as JSON");
  add_common(analyze, o);
  analyze->add_option("--noise-samples", o.noise_samples, "Monte-Carlo samples for alpha and beta");
  auto* run = app.add_subcommand("run", "one experiment: <out>/curve.csv and curve.json");
  add_common(run, o);
  auto* sw = app.add_subcommand("sweep", "sweep mu or rho: <out>/sweep.csv and sweep.json");
  add_common(sw, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) {
      ExperimentConfig cfg = resolve(o, false);
      std::string text = analysis_json(cfg, o.noise_samples);
      std::cout << text << '\n';
      if (analyze->count("--out")) {
        fs::create_directories(o.out);
        std::ofstream(fs::path(o.out) / "analysis.json") << text << '\n';
      }
    } else if (run->parsed()) {
      ExperimentConfig cfg = resolve(o, false);
      ExperimentResult r = run_experiment(cfg);
      write_curve_csv(fs::path(o.out) / "curve.csv", r);
      write_sidecar(fs::path(o.out) / "curve.json", cfg, {&r});
      report(r);
      return r.failed ? 3 : 0;
    } else {
      const bool by_mu = o.mu.size() > 1, by_rho = o.rho.size() > 1;
      if (by_mu == by_rho) {
        std::cerr << "sweep: give several values to exactly one of --mu and --rho\n";
        return 2;
      }
      ExperimentConfig cfg = resolve(o, true);
      auto rows = sweep(cfg, by_mu ? SweepParameter::mu : SweepParameter::rho, by_mu ? o.mu : o.rho);
      write_sweep_csv(fs::path(o.out) / "sweep.csv", rows);
      std::vector<const ExperimentResult*> rs;
      for (const auto& row : rows) rs.push_back(&row.result);
      write_sidecar(fs::path(o.out) / "sweep.json", cfg, rs, by_mu ? "mu" : "rho");
      for (const auto& row : rows) report(row.result);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
