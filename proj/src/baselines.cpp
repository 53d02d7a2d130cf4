#include "gnep/baselines.hpp"

#include "gnep/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gnep {

namespace {

void primal_dual_step(const QuadraticGame& game, const std::vector<AffineConstraint>& caps,
                      double mu, double eps, MultiplierState& s, RngStream* rng,
                      std::size_t iteration) {
  game.check_dims(s.w);
  if (static_cast<std::size_t>(s.lambda.size()) != caps.size())
    throw StructuralError("need one multiplier per capacity constraint");
  if (!(mu > 0.0)) throw StructuralError("step size must be positive");
  if (!(eps >= 0.0)) throw StructuralError("regularization must be >= 0");

  // gradient of the sampled Lagrangian at the previous iterate
  Vector g = rng ? sample_gradient(game, s.w, *rng) : block_gradient(game, s.w);
  Vector slack(caps.size());
  for (std::size_t l = 0; l < caps.size(); ++l) {
    slack[l] = caps[l].eval(s.w);
    for (const auto& e : caps[l].a) g[e.index] += s.lambda[l] * e.value;
  }
  if (eps != 0.0) g += eps * s.w;
  s.w = project_nonneg(s.w - mu * g);
  Vector next = s.lambda + mu * slack;
  if (eps != 0.0) next -= mu * eps * s.lambda;
  s.lambda = project_nonneg(next);

  const double norm = std::hypot(s.w.norm(), s.lambda.norm());
  if (!std::isfinite(norm) || norm > kDivergenceNorm) throw DivergenceError(iteration, norm);
}

}  // namespace

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

void arrow_hurwicz_step(const QuadraticGame& game, const std::vector<AffineConstraint>& caps,
                        double mu, MultiplierState& state, RngStream* rng, std::size_t iteration) {
  primal_dual_step(game, caps, mu, 0.0, state, rng, iteration);
}

void tikhonov_step(const QuadraticGame& game, const std::vector<AffineConstraint>& caps, double mu,
                   double eps, MultiplierState& state, RngStream* rng, std::size_t iteration) {
  primal_dual_step(game, caps, mu, eps, state, rng, iteration);
}

double KktResidual::max() const {
  return std::max({stationarity, dual_sign, complementarity, violation});
}

KktResidual kkt_residual(const QuadraticGame& game, const std::vector<AffineConstraint>& caps,
                         const MultiplierState& s) {
  Vector g = block_gradient(game, s.w);
  KktResidual r;
  for (std::size_t l = 0; l < caps.size(); ++l) {
    const double v = caps[l].eval(s.w);
    for (const auto& e : caps[l].a) g[e.index] += s.lambda[l] * e.value;
    r.complementarity = std::max(r.complementarity, std::abs(s.lambda[l] * v));
    r.violation = std::max(r.violation, v);
  }
  double st = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (s.w[i] > 0.0)
      st += g[i] * g[i];
    else
      r.dual_sign = std::max(r.dual_sign, -g[i]);
    r.violation = std::max(r.violation, -s.w[i]);
  }
  r.stationarity = std::sqrt(st);
  return r;
}

}  // namespace gnep
