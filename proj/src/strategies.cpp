#include "gnep/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gnep {

StepSizes::StepSizes(std::vector<double> mu) : mu_(std::move(mu)) {
  if (mu_.empty()) throw StructuralError("step sizes need at least one agent");
  for (double m : mu_)
    if (!(m > 0.0) || !std::isfinite(m)) throw StructuralError("step sizes must be positive and finite");
  auto [lo, hi] = std::minmax_element(mu_.begin(), mu_.end());
  mu_min_ = *lo;
  mu_max_ = *hi;
}

Vector StepSizes::expand(const Topology& topo) const {
  if (mu_.size() != topo.num_agents())
    throw StructuralError("got " + std::to_string(mu_.size()) + " step sizes for " +
                          std::to_string(topo.num_agents()) + " agents");
  Vector u(topo.total_dim());
  for (std::size_t k = 0; k < mu_.size(); ++k) topo.block(u, k).setConstant(mu_[k]);
  return u;
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::SG: return "SG";
    case StrategyKind::ATP: return "ATP";
    case StrategyKind::PTA: return "PTA";
  }
  return "?";
}

StrategyKind strategy_from_string(std::string_view name) {
  if (name == "SG" || name == "sg") return StrategyKind::SG;
  if (name == "ATP" || name == "atp") return StrategyKind::ATP;
  if (name == "PTA" || name == "pta") return StrategyKind::PTA;
  throw StructuralError("unknown strategy '" + std::string(name) + "'");
}

std::pair<int, int> unified_coefficients(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::ATP: return {0, 1};
    case StrategyKind::PTA: return {1, 0};
    case StrategyKind::SG: break;
  }
  throw StructuralError("SG is not a two-step strategy");
}

Stepper::Stepper(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                 const PenaltyConfig& cfg, const StepSizes& steps)
    : kind_(kind), game_(game), cs_(cs), cfg_(cfg), u_(steps.expand(game.topology())) {
  cfg_.validate();
  if (!cfg_.differentiable())
    throw NonDifferentiableError("learning strategies need a differentiable penalty");
  g_.resize(u_.size());
  psi_.resize(u_.size());
}

void Stepper::add_gradient(const Vector& at, RngStream* rng, Vector& out) {
  out.noalias() += game_.B() * at;
  out += game_.b();
  if (rng && game_.noise().num_draws() > 0) {
    game_.draw(*rng, draws_);
    game_.add_gradient_noise(at, draws_, out);
  }
}

void Stepper::advance(Vector& w, RngStream* rng, std::size_t iteration) {
  game_.check_dims(w);
  const double rho = cfg_.rho;
  switch (kind_) {
    case StrategyKind::SG:
      g_.setZero();
      add_gradient(w, rng, g_);
      if (rho != 0.0) add_penalty_gradient(cs_, cfg_, w, rho, g_);
      w -= u_.cwiseProduct(g_);
      break;
    case StrategyKind::ATP:
      g_.setZero();
      add_gradient(w, rng, g_);
      psi_ = w - u_.cwiseProduct(g_);
      g_.setZero();
      if (rho != 0.0) add_penalty_gradient(cs_, cfg_, psi_, rho, g_);
      w = psi_ - u_.cwiseProduct(g_);
      break;
    case StrategyKind::PTA:
      g_.setZero();
      if (rho != 0.0) add_penalty_gradient(cs_, cfg_, w, rho, g_);
      psi_ = w - u_.cwiseProduct(g_);
      g_.setZero();
      add_gradient(psi_, rng, g_);
      w = psi_ - u_.cwiseProduct(g_);
      break;
  }
  const double norm = w.norm();
  if (!std::isfinite(norm) || norm > kDivergenceNorm) throw DivergenceError(iteration, norm);
}

ActionProfile step(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                   const PenaltyConfig& cfg, const StepSizes& steps, const ActionProfile& w_prev,
                   RngStream& rng, bool stochastic, std::size_t iteration) {
  Stepper stepper(kind, game, cs, cfg, steps);
  Vector w = w_prev;
  stepper.advance(w, stochastic ? &rng : nullptr, iteration);
  return w;
}

Trajectory run_trajectory(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                          const PenaltyConfig& cfg, const StepSizes& steps, const ActionProfile& w0,
                          std::size_t num_iters, RngStream& rng, bool stochastic,
                          std::size_t thinning) {
  if (num_iters < 1) throw StructuralError("num_iters must be at least 1");
  if (thinning < 1) throw StructuralError("thinning must be at least 1");
  Stepper stepper(kind, game, cs, cfg, steps);
  Trajectory out;
  Vector w = w0;
  out.iterations.push_back(0);
  out.iterates.push_back(w);
  for (std::size_t i = 1; i <= num_iters; ++i) {
    stepper.advance(w, stochastic ? &rng : nullptr, i);
    if (i % thinning == 0 || i == num_iters) {
      out.iterations.push_back(i);
      out.iterates.push_back(w);
    }
  }
  return out;
}

}  // namespace gnep
