#pragma once

#include "gnep/game.hpp"
#include "gnep/penalty.hpp"
#include "gnep/rng.hpp"

#include <cstddef>
#include <vector>

namespace gnep {

/// Componentwise max(0, v).
Vector project_nonneg(const Vector& v);

/// Primal iterate plus one nonnegative multiplier per capacity constraint.
struct MultiplierState {
  Vector w;
  Vector lambda;
};

/// One Arrow-Hurwicz update (sum of sampled gradient and multiplier terms).
/// Capacities are the constraints r(l) - h_l <= 0 written as a^T w + c <= 0.
/// Both updates read the previous iterate. `rng` null means noise-free.
void arrow_hurwicz_step(const QuadraticGame& game, const std::vector<AffineConstraint>& caps,
                        double mu, MultiplierState& state, RngStream* rng,
                        std::size_t iteration = 1);

/// Arrow-Hurwicz with constant Tikhonov regularization eps on w and lambda.
void tikhonov_step(const QuadraticGame& game, const std::vector<AffineConstraint>& caps, double mu,
                   double eps, MultiplierState& state, RngStream* rng, std::size_t iteration = 1);

struct KktResidual {
  double stationarity = 0.0;     ///< |F + sum lambda a| over entries with w > 0
  double dual_sign = 0.0;        ///< negative part of the same gradient where w = 0
  double complementarity = 0.0;  ///< max |lambda_l (a_l^T w + c_l)|
  double violation = 0.0;        ///< max positive part of the capacity rows and of -w

  double max() const;
};

KktResidual kkt_residual(const QuadraticGame& game, const std::vector<AffineConstraint>& caps,
                         const MultiplierState& state);

}  // namespace gnep
