#pragma once

#include "gnep/game.hpp"
#include "gnep/penalty.hpp"
#include "gnep/rng.hpp"

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

namespace gnep {

/// Per-agent constant step sizes mu_k.
class StepSizes {
public:
  explicit StepSizes(std::vector<double> mu);
  static StepSizes uniform(std::size_t num_agents, double mu) {
    return StepSizes(std::vector<double>(num_agents, mu));
  }

  const std::vector<double>& mu() const noexcept { return mu_; }
  double mu_max() const noexcept { return mu_max_; }
  double mu_min() const noexcept { return mu_min_; }
  /// t = 1 - mu_min / mu_max
  double t() const noexcept { return 1.0 - mu_min_ / mu_max_; }

  /// Diagonal of U = diag{mu_k I_{M_k}}.
  Vector expand(const Topology& topo) const;

private:
  std::vector<double> mu_;
  double mu_max_ = 0.0;
  double mu_min_ = 0.0;
};

enum class StrategyKind { SG, ATP, PTA };

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_from_string(std::string_view name);

/// (c1, c2) of the unified recursion; SG has none and throws.
std::pair<int, int> unified_coefficients(StrategyKind kind);

inline constexpr double kDivergenceNorm = 1e12;

/// One synchronous network update, reusable across iterations.
class Stepper {
public:
  Stepper(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
          const PenaltyConfig& cfg, const StepSizes& steps);

  /// w <- next iterate. `rng` null means the deterministic recursion.
  /// Throws DivergenceError tagged with `iteration`.
  void advance(Vector& w, RngStream* rng, std::size_t iteration);

  StrategyKind kind() const noexcept { return kind_; }
  const Vector& u() const noexcept { return u_; }

private:
  void add_gradient(const Vector& at, RngStream* rng, Vector& out);

  StrategyKind kind_;
  const QuadraticGame& game_;
  const ConstraintSet& cs_;
  PenaltyConfig cfg_;
  Vector u_;
  Vector g_, psi_;
  std::vector<double> draws_;
};

ActionProfile step(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                   const PenaltyConfig& cfg, const StepSizes& steps, const ActionProfile& w_prev,
                   RngStream& rng, bool stochastic, std::size_t iteration = 1);

struct Trajectory {
  std::vector<std::size_t> iterations;  ///< starts with 0 (the initial point)
  std::vector<ActionProfile> iterates;
};

/// Applies step num_iters times, keeping w_0 and every `thinning`-th iterate
/// (the last one is always kept).
Trajectory run_trajectory(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                          const PenaltyConfig& cfg, const StepSizes& steps, const ActionProfile& w0,
                          std::size_t num_iters, RngStream& rng, bool stochastic,
                          std::size_t thinning = 1);

}  // namespace gnep
