#include "gnep/harness.hpp"

#include "gnep/baselines.hpp"
#include "gnep/io.hpp"
#include "gnep/strategies.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

namespace gnep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RunOutput {
  bool ok = true;
  std::size_t fail_iter = 0;
  std::vector<double> sq;  // |w_i - ref|^2, or |w_i|^2 when the reference is unknown
  Matrix sum_w;            // M x T, only for the baselines
  double min_comp = std::numeric_limits<double>::infinity();
};

std::vector<std::size_t> recorded_iterations(const ExperimentConfig& cfg) {
  std::vector<std::size_t> out{0};
  for (std::size_t i = 1; i <= cfg.num_iters; ++i)
    if (i % cfg.thinning == 0 || i == cfg.num_iters) out.push_back(i);
  return out;
}

double spectral_radius(const Matrix& J) {
  Eigen::EigenSolver<Matrix> eig(J, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Problem Problem::from_cournot(const CournotSpec& spec) {
  CournotGame cg = build_game(spec);
  return {std::move(cg.game), std::move(cg.constraints), std::move(cg.capacities)};
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SG: return "SG";
    case Algorithm::ATP: return "ATP";
    case Algorithm::PTA: return "PTA";
    case Algorithm::AH: return "AH";
    case Algorithm::TIK: return "TIK";
  }
  return "?";
}

Algorithm algorithm_from_string(std::string_view name) {
  std::string up(name);
  for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (up == "SG") return Algorithm::SG;
  if (up == "ATP") return Algorithm::ATP;
  if (up == "PTA") return Algorithm::PTA;
  if (up == "AH") return Algorithm::AH;
  if (up == "TIK") return Algorithm::TIK;
  throw StructuralError("unknown algorithm '" + std::string(name) + "' (SG, ATP, PTA, AH, TIK)");
}

bool is_penalty_method(Algorithm a) {
  return a == Algorithm::SG || a == Algorithm::ATP || a == Algorithm::PTA;
}

StrategyKind strategy_of(Algorithm a) {
  switch (a) {
    case Algorithm::SG: return StrategyKind::SG;
    case Algorithm::ATP: return StrategyKind::ATP;
    case Algorithm::PTA: return StrategyKind::PTA;
    default: break;
  }
  throw StructuralError(std::string(to_string(a)) + " is not a penalty method");
}

void ExperimentConfig::validate() const {
  if (num_runs < 1) throw StructuralError("num_runs must be >= 1");
  if (num_iters < 1) throw StructuralError("num_iters must be >= 1");
  if (thinning < 1) throw StructuralError("thinning must be >= 1");
  if (!(steady_window > 0.0 && steady_window <= 0.5))
    throw StructuralError("steady-state window must lie in (0, 0.5]");
  if (mu.empty()) throw StructuralError("mu must not be empty");
  for (double m : mu)
    if (!(m > 0.0)) throw StructuralError("mu must be positive");
  if (!(rho >= 0.0)) throw StructuralError("rho must be >= 0");
  if (algorithm == Algorithm::TIK && !(epsilon >= 0.0)) throw StructuralError("epsilon must be >= 0");
  if ((algorithm == Algorithm::AH || algorithm == Algorithm::TIK) && mu.size() != 1)
    throw StructuralError("the baselines use one uniform step size");
  if (!(tol > 0.0)) throw StructuralError("tol must be positive");
  if (threads < 1) throw StructuralError("threads must be >= 1");
}

std::shared_ptr<const Problem> resolve_problem(const ExperimentConfig& cfg) {
  if (cfg.problem) return cfg.problem;
  return std::make_shared<const Problem>(
      Problem::from_cournot(cfg.cournot ? *cfg.cournot : paper_network()));
}

StepSizes resolve_steps(const ExperimentConfig& cfg, const Topology& topo) {
  if (cfg.mu.size() == 1) return StepSizes::uniform(topo.num_agents(), cfg.mu.front());
  return StepSizes(cfg.mu);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  auto problem = resolve_problem(cfg);
  const QuadraticGame& game = problem->game;
  const ConstraintSet& cs = problem->constraints;
  const auto& caps = problem->capacities;
  const Topology& topo = game.topology();
  const StepSizes steps = resolve_steps(cfg, topo);
  const Vector u = steps.expand(topo);
  const auto M = static_cast<Eigen::Index>(game.dim());
  const Vector w0 = cfg.w0 ? *cfg.w0 : Vector::Zero(M);
  game.check_dims(w0);

  ExperimentResult res;
  res.config = cfg;
  res.iterations = recorded_iterations(cfg);
  const std::size_t T = res.iterations.size();
  const bool penalty = is_penalty_method(cfg.algorithm);
  const PenaltyConfig pcfg{cfg.rho};
  SolveOptions sopt;
  sopt.tol = cfg.tol;

  // reference point and local rate of the deterministic map
  if (penalty) {
    res.w_star = solve_penalized_nash(game, cs, pcfg, sopt);
    const Matrix I = Matrix::Identity(M, M);
    const Matrix UB = u.asDiagonal() * game.B();
    if (cfg.algorithm == Algorithm::SG) {
      res.reference = res.w_star;
      res.bias = 0.0;
      Matrix H = cfg.rho * penalty_hessian(cs, pcfg, res.w_star);
      res.kappa = spectral_radius(I - u.asDiagonal() * (game.B() + H));
    } else {
      const StrategyKind kind = strategy_of(cfg.algorithm);
      try {
        FixedPoint fp = solve_fixed_point(kind, game, cs, pcfg, steps, sopt, false);
        res.reference = fp.w;
        res.condition_violated = fp.violated;
        res.bias = (res.w_star - fp.w).norm();
        Matrix P = cfg.rho * u.asDiagonal() *
                   penalty_hessian(cs, pcfg, kind == StrategyKind::ATP ? fp.psi : fp.w);
        res.kappa = spectral_radius(kind == StrategyKind::ATP ? (I - P) * (I - UB) : (I - UB) * (I - P));
      } catch (const ConvergenceError& e) {
        res.reference = res.w_star;
        res.bias = kNaN;
        res.condition_violated = "fixed point not found";
        res.warnings.push_back(std::string("fixed-point solve failed, using w*: ") + e.what());
        res.kappa = 1.0;
      }
    }
    if (res.kappa < 1.0) {
      res.transient_iters = static_cast<std::size_t>(std::ceil(std::log(cfg.tol) / std::log(res.kappa)));
    } else {
      // piecewise map: the local linearization can expand while the iteration
      // still settles, so only the trailing window applies
      res.transient_iters = 0;
      res.warnings.push_back("no transient estimate, local linear rate " + std::to_string(res.kappa));
    }
  } else {
    res.bias = kNaN;
  }

  // Monte-Carlo runs, reduced in run order
  const RngStream root(cfg.seed);
  auto run_one = [&](std::size_t r) {
    RunOutput out;
    out.sq.assign(T, 0.0);
    if (!penalty) out.sum_w = Matrix::Zero(M, static_cast<Eigen::Index>(T));
    RngStream rng = root.split(r);
    RngStream* noise = cfg.stochastic ? &rng : nullptr;
    std::size_t slot = 0;
    auto record = [&](const Vector& w) {
      if (penalty) {
        out.sq[slot] = (w - res.reference).squaredNorm();
      } else {
        out.sq[slot] = w.squaredNorm();
        out.sum_w.col(static_cast<Eigen::Index>(slot)) = w;
      }
      out.min_comp = std::min(out.min_comp, w.minCoeff());
      ++slot;
    };
    try {
      if (penalty) {
        Stepper stepper(strategy_of(cfg.algorithm), game, cs, pcfg, steps);
        Vector w = w0;
        record(w);
        for (std::size_t i = 1; i <= cfg.num_iters; ++i) {
          stepper.advance(w, noise, i);
          if (slot < T && res.iterations[slot] == i) record(w);
        }
      } else {
        MultiplierState s{w0, Vector::Zero(static_cast<Eigen::Index>(caps.size()))};
        record(s.w);
        const double mu = cfg.mu.front();
        for (std::size_t i = 1; i <= cfg.num_iters; ++i) {
          if (cfg.algorithm == Algorithm::AH)
            arrow_hurwicz_step(game, caps, mu, s, noise, i);
          else
            tikhonov_step(game, caps, mu, cfg.epsilon, s, noise, i);
          // every emitted iterate counts for feasibility, not just recorded ones
          out.min_comp = std::min(out.min_comp, s.w.minCoeff());
          if (slot < T && res.iterations[slot] == i) record(s.w);
        }
      }
    } catch (const DivergenceError& e) {
      out.ok = false;
      out.fail_iter = e.iteration();
    }
    return out;
  };

  std::vector<double> sum_sq(T, 0.0);
  Matrix sum_w = penalty ? Matrix() : Matrix::Zero(M, static_cast<Eigen::Index>(T));
  std::size_t survivors = 0;
  res.min_component = std::numeric_limits<double>::infinity();
  const std::size_t batch = std::max<std::size_t>(1, cfg.threads);
  std::vector<RunOutput> outs(batch);
  for (std::size_t start = 0; start < cfg.num_runs; start += batch) {
    const std::size_t n = std::min(batch, cfg.num_runs - start);
    if (n == 1 || cfg.threads == 1) {
      for (std::size_t j = 0; j < n; ++j) outs[j] = run_one(start + j);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t j = 0; j < n; ++j)
        pool.emplace_back([&, j] { outs[j] = run_one(start + j); });
      for (auto& th : pool) th.join();
    }
    for (std::size_t j = 0; j < n; ++j) {
      const RunOutput& o = outs[j];
      if (!o.ok) {
        res.diverged_runs.push_back(start + j);
        res.divergence_iterations.push_back(o.fail_iter);
        continue;
      }
      ++survivors;
      for (std::size_t s = 0; s < T; ++s) sum_sq[s] += o.sq[s];
      if (!penalty) sum_w += o.sum_w;
      res.min_component = std::min(res.min_component, o.min_comp);
    }
  }

  if (2 * res.diverged_runs.size() > cfg.num_runs) {
    res.failed = true;
    res.failure = std::to_string(res.diverged_runs.size()) + " of " + std::to_string(cfg.num_runs) +
                  " runs diverged";
  }
  if (survivors == 0) {
    res.msd.assign(T, kNaN);
    res.steady_msd = kNaN;
    if (!res.failed) {
      res.failed = true;
      res.failure = "all runs diverged";
    }
    return res;
  }

  const double n = static_cast<double>(survivors);
  res.msd.resize(T);
  if (penalty) {
    for (std::size_t s = 0; s < T; ++s) res.msd[s] = sum_sq[s] / n;
  } else {
    // reference is the mean final iterate; E|w - r|^2 = E|w|^2 - 2 r^T E w + |r|^2
    res.reference = sum_w.col(static_cast<Eigen::Index>(T - 1)) / n;
    const double rr = res.reference.squaredNorm();
    for (std::size_t s = 0; s < T; ++s) {
      const double v = sum_sq[s] / n - 2.0 * res.reference.dot(sum_w.col(static_cast<Eigen::Index>(s))) / n + rr;
      res.msd[s] = std::max(0.0, v);
    }
  }

  const auto window_start = static_cast<std::size_t>(
      std::ceil((1.0 - cfg.steady_window) * static_cast<double>(cfg.num_iters)));
  const std::size_t first = std::max(window_start, res.transient_iters);
  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t s = 0; s < T; ++s)
    if (res.iterations[s] >= first && res.iterations[s] > 0) {
      if (cnt == 0) res.steady_start = res.iterations[s];
      acc += res.msd[s];
      ++cnt;
    }
  if (cnt == 0) {
    res.steady_msd = kNaN;
    res.warnings.push_back("transient estimate (" + std::to_string(res.transient_iters) +
                           " iterations) exceeds the run length");
  } else {
    res.steady_msd = acc / static_cast<double>(cnt);
    for (std::size_t s = 0; s < T; ++s)
      if (res.msd[s] <= 2.0 * res.steady_msd) {
        res.settle_iteration = res.iterations[s];
        break;
      }
  }
  return res;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepParameter parameter,
                            const std::vector<double>& values) {
  if (values.empty()) throw StructuralError("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double v : values) {
    ExperimentConfig cfg = base;
    if (parameter == SweepParameter::mu)
      cfg.mu = {v};
    else
      cfg.rho = v;
    SweepRow row{v, {}};
    try {
      row.result = run_experiment(cfg);
    } catch (const std::exception& e) {
      row.result.config = cfg;
      row.result.failed = true;
      row.result.failure = e.what();
      row.result.steady_msd = kNaN;
      row.result.bias = kNaN;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Json analysis(const ExperimentConfig& cfg, std::size_t noise_samples) {
  auto problem = resolve_problem(cfg);
  const auto& game = problem->game;
  const StepSizes steps = resolve_steps(cfg, game.topology());
  NoiseConstants noise = noise_constants(game, noise_samples, cfg.seed);
  AnalysisConstants c = analysis_constants(game, problem->constraints, PenaltyConfig{cfg.rho}, steps, noise);
  Json j;
  j["constants"] = {{"nu", c.nu},
                    {"delta", c.delta},
                    {"delta_p", c.delta_p},
                    {"gamma", c.gamma},
                    {"rho", c.rho},
                    {"mu_max", c.mu_max},
                    {"t", c.t},
                    {"alpha", c.alpha},
                    {"beta", c.beta},
                    {"nu_p", c.nu_p()},
                    {"nu_pp", c.nu_pp()},
                    {"strongly_monotone", c.nu > 0.0}};
  if (noise.samples > 0)
    j["noise_empirical"] = {{"samples", noise.samples},
                            {"alpha", noise.alpha_empirical},
                            {"alpha_se", noise.alpha_se},
                            {"beta", noise.beta_empirical},
                            {"beta_se", noise.beta_se}};
  Json bounds;
  for (BoundKind k : {BoundKind::sg_theorem2, BoundKind::deterministic_theorem3,
                      BoundKind::stochastic_theorem4, BoundKind::bias_theorem5}) {
    StepSizeBound b = step_size_bound(k, c);
    bounds[std::string(to_string(k))] = {{"mu_bound", b.mu_bound},
                                         {"t_bound", b.t_bound},
                                         {"rho_bound", b.rho_bound},
                                         {"satisfied", b.satisfied()},
                                         {"violated", b.violated}};
  }
  j["bounds"] = bounds;
  j["contraction"] = {{"a1", contraction_a1(c)}, {"kappa", contraction_modulus(c)}};
  return j;
}

Json result_to_json(const ExperimentResult& r) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return Json{{"algorithm", std::string(to_string(r.config.algorithm))},
              {"mu", r.config.mu},
              {"rho", r.config.rho},
              {"steady_msd", r.steady_msd},
              {"steady_start", r.steady_start},
              {"transient_iters", r.transient_iters},
              {"kappa", r.kappa},
              {"settle_iteration", r.settle_iteration},
              {"bias", r.bias},
              {"min_component", r.min_component},
              {"condition_violated", r.condition_violated},
              {"failed", r.failed},
              {"failure", r.failure},
              {"warnings", r.warnings},
              {"diverged_runs", r.diverged_runs},
              {"divergence_iterations", r.divergence_iterations},
              {"w_star", vec(r.w_star)},
              {"reference", vec(r.reference)}};
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string analysis_json(const ExperimentConfig& cfg, std::size_t noise_samples) {
  return analysis(cfg, noise_samples).dump(2);
}

void write_curve_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  auto out = open_out(path);
  out << "iter,msd\n";
  for (std::size_t s = 0; s < r.msd.size(); ++s) out << r.iterations[s] << ',' << num(r.msd[s]) << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "param,steady_msd,bias\n";
  for (const auto& row : rows)
    out << num(row.param) << ',' << num(row.result.steady_msd) << ',' << num(row.result.bias) << '\n';
}

void write_sidecar(const std::filesystem::path& path, const ExperimentConfig& cfg,
                   const std::vector<const ExperimentResult*>& results,
                   std::string_view sweep_parameter) {
  Json j = analysis(cfg, 0);
  j["config"] = config_to_json(cfg);
  if (!sweep_parameter.empty()) j["sweep_parameter"] = std::string(sweep_parameter);
  Json rs = Json::array();
  for (const auto* r : results) rs.push_back(result_to_json(*r));
  j["results"] = rs;
  j["csv"] = sweep_parameter.empty() ? "iter,msd" : "param,steady_msd,bias";
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace gnep
