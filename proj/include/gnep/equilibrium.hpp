#pragma once

#include "gnep/game.hpp"
#include "gnep/penalty.hpp"
#include "gnep/strategies.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnep {

/// Gradient-noise constants: E|B~ w + b~|^2 <= alpha |w|^2 + beta.
struct NoiseConstants {
  double alpha = 0.0;  ///< closed form lambda_max(sum h^2/3 D^T D)
  double beta = 0.0;   ///< closed form sum h^2/3 |d|^2
  double alpha_empirical = 0.0;
  double beta_empirical = 0.0;
  double alpha_se = 0.0;
  double beta_se = 0.0;
  std::size_t samples = 0;
};

/// Closed forms plus Monte-Carlo estimates from `num_samples` draws
/// (num_samples = 0 skips the estimate).
NoiseConstants noise_constants(const QuadraticGame& game, std::size_t num_samples = 100000,
                               std::uint64_t seed = 0);

struct AnalysisConstants {
  double nu = 0.0;
  double delta = 0.0;
  double delta_p = 0.0;
  std::vector<double> gamma;
  double rho = 0.0;
  double mu_max = 0.0;
  double t = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  /// nu' = nu - t (delta + rho delta_p)
  double nu_p() const { return nu - t * (delta + rho * delta_p); }
  /// nu'' = nu - t delta
  double nu_pp() const { return nu - t * delta; }
};

AnalysisConstants analysis_constants(const QuadraticGame& game, const ConstraintSet& cs,
                                     const PenaltyConfig& cfg, const StepSizes& steps,
                                     const NoiseConstants& noise);

enum class BoundKind { sg_theorem2, deterministic_theorem3, stochastic_theorem4, bias_theorem5 };

std::string_view to_string(BoundKind kind);

struct StepSizeBound {
  double mu_bound = 0.0;
  double t_bound = 0.0;
  double rho_bound = 0.0;  ///< rho must exceed this (0 when unconstrained)
  /// Empty when mu_max, t and rho in the constants satisfy every condition.
  std::string violated;

  bool satisfied() const noexcept { return violated.empty(); }
};

/// Theorem bounds evaluated at the constants. The mu bound is reported even
/// when another condition fails; a non-positive nu' gives mu_bound = 0.
StepSizeBound step_size_bound(BoundKind kind, const AnalysisConstants& c);

/// F^p(w) = F(w) + rho grad p(w).
Vector penalized_gradient(const QuadraticGame& game, const ConstraintSet& cs,
                          const PenaltyConfig& cfg, const ActionProfile& w);

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_newton = 200;
  std::size_t max_fallback = 10000000;
  std::optional<Vector> initial;
};

/// w*(rho) with |F^p(w*)| <= tol. Semismooth Newton on F^p with backtracking,
/// falling back to the plain gradient contraction.
ActionProfile solve_penalized_nash(const QuadraticGame& game, const ConstraintSet& cs,
                                   const PenaltyConfig& cfg, const SolveOptions& opt = {});

struct FixedPoint {
  Vector w;
  Vector phi;
  Vector psi;
  double residual = 0.0;        ///< |T(w) - w|
  std::string violated;         ///< Theorem 3 condition that fails, if any
};

/// The deterministic map w_{i-1} -> w_i of the two-step strategy.
Vector fixed_point_map(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                       const PenaltyConfig& cfg, const Vector& u, const Vector& w);

/// w^inf of ATP or PTA. With `strict`, a failing Theorem 3 condition throws
/// ConditionViolated; otherwise the solve proceeds and the condition is
/// reported in the result.
FixedPoint solve_fixed_point(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                             const PenaltyConfig& cfg, const StepSizes& steps,
                             const SolveOptions& opt = {}, bool strict = true);

/// a_1 of the two-step contraction analysis; kappa = sqrt(1 - a_1).
double contraction_a1(const AnalysisConstants& c);
double contraction_modulus(const AnalysisConstants& c);

/// Per-step factor of the SG mean-square recursion,
/// 1 - 2 mu nu' + mu^2 ((delta + rho delta_p)^2 + 2 alpha).
double sg_msd_factor(const AnalysisConstants& c);

struct BiasBound {
  double a1 = 0.0;
  double b = 0.0;
  double eta = 0.0;
  double bound = 0.0;  ///< b/a1 + sqrt(eta/a1 + b^2/a1^2)
};

/// Upper bound on |w* - w^inf| given |F(w*)| (the unpenalized gradient).
BiasBound bias_bound(StrategyKind kind, const AnalysisConstants& c, double grad_norm_at_nash);

}  // namespace gnep
