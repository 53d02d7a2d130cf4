#pragma once

#include "gnep/cournot.hpp"
#include "gnep/equilibrium.hpp"
#include "gnep/game.hpp"
#include "gnep/penalty.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnep {

/// A game with its shared constraints. `capacities` are the rows the
/// primal-dual baselines attach multipliers to.
struct Problem {
  QuadraticGame game;
  ConstraintSet constraints;
  std::vector<AffineConstraint> capacities;

  static Problem from_cournot(const CournotSpec& spec);
};

enum class Algorithm { SG, ATP, PTA, AH, TIK };

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);
bool is_penalty_method(Algorithm a);
StrategyKind strategy_of(Algorithm a);

struct ExperimentConfig {
  /// Used when `problem` is null; defaults to the evaluation network.
  std::optional<CournotSpec> cournot;
  std::shared_ptr<const Problem> problem;

  Algorithm algorithm = Algorithm::ATP;
  std::vector<double> mu{0.003};  ///< one value means uniform
  double rho = 200.0;
  double epsilon = 0.5012;        ///< TIK only
  std::size_t num_iters = 3000;
  std::size_t num_runs = 200;
  std::uint64_t seed = 0;
  std::optional<Vector> w0;       ///< zero when unset
  std::size_t thinning = 1;
  double steady_window = 0.1;     ///< trailing fraction of the iterations
  double tol = 1e-10;             ///< reference solves and transient length
  bool stochastic = true;
  std::size_t threads = 1;

  void validate() const;
};

/// Problem the config refers to.
std::shared_ptr<const Problem> resolve_problem(const ExperimentConfig& cfg);

StepSizes resolve_steps(const ExperimentConfig& cfg, const Topology& topo);

struct ExperimentResult {
  ExperimentConfig config;

  std::vector<std::size_t> iterations;
  std::vector<double> msd;  ///< averaged over surviving runs

  double steady_msd = 0.0;
  /// first recorded iteration included in steady_msd
  std::size_t steady_start = 0;
  /// ceil(log(tol) / log(kappa)) with kappa the local linear rate of the
  /// deterministic map at the reference; 0 for the baselines
  std::size_t transient_iters = 0;
  double kappa = 0.0;
  /// first recorded iteration with msd <= 2 * steady_msd
  std::size_t settle_iteration = 0;

  /// |w* - w^inf| (0 for SG, NaN for the baselines)
  double bias = 0.0;
  Vector reference;
  Vector w_star;
  /// smallest action component seen over all runs and iterations
  double min_component = 0.0;

  /// Theorem 3 condition that fails for ATP/PTA; the reference is still w^inf
  /// whenever the fixed-point solve converges, w* otherwise
  std::string condition_violated;
  bool failed = false;
  std::string failure;
  /// non-fatal issues, e.g. a transient longer than the run
  std::vector<std::string> warnings;
  std::vector<std::size_t> diverged_runs;
  std::vector<std::size_t> divergence_iterations;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

enum class SweepParameter { mu, rho };

struct SweepRow {
  double param = 0.0;
  ExperimentResult result;
};

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepParameter parameter,
                            const std::vector<double>& values);

/// Constants and all four theorem bounds for a config, as JSON text.
std::string analysis_json(const ExperimentConfig& cfg, std::size_t noise_samples = 0);

void write_curve_csv(const std::filesystem::path& path, const ExperimentResult& r);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_sidecar(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const std::vector<const ExperimentResult*>& results,
                   std::string_view sweep_parameter = {});

}  // namespace gnep
