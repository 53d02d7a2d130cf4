#include "gnep/equilibrium.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace gnep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix dense_direction(const Disturbance& d, Eigen::Index m) {
  Matrix D = Matrix::Zero(m, m);
  for (const auto& e : d.matrix) D(e.row, e.col) += e.value;
  return D;
}

Vector dense_offset(const Disturbance& d, Eigen::Index m) {
  Vector v = Vector::Zero(m);
  for (const auto& e : d.offset) v[e.index] += e.value;
  return v;
}

double top_eigenvalue(const Matrix& sym, Vector* vec = nullptr) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Eigen::Index last = eig.eigenvalues().size() - 1;
  if (vec) *vec = eig.eigenvectors().col(last);
  return eig.eigenvalues()[last];
}

double mean_and_se(const std::vector<double>& z, double& se) {
  const double n = static_cast<double>(z.size());
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  se = z.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return mean;
}

// Newton with backtracking on |R|; returns the final residual norm
template <class Residual, class Jacobian>
double newton(Vector& w, Residual&& residual, Jacobian&& jacobian, double tol, std::size_t max_iter) {
  Vector r = residual(w);
  double rn = r.norm();
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (rn <= 1e-3 * tol) break;
    Vector d = jacobian(w).partialPivLu().solve(-r);
    if (!d.allFinite()) break;
    double s = 1.0;
    Vector trial = w + d;
    Vector rt = residual(trial);
    while (rt.norm() > (1.0 - 1e-4 * s) * rn && s > 1e-12) {
      s *= 0.5;
      trial = w + s * d;
      rt = residual(trial);
    }
    const double tn = rt.norm();
    if (!(tn < rn)) break;  // stalled, usually at round-off level
    w = std::move(trial);
    r = std::move(rt);
    rn = tn;
  }
  return rn;
}

}  // namespace

NoiseConstants noise_constants(const QuadraticGame& game, std::size_t num_samples,
                               std::uint64_t seed) {
  NoiseConstants out;
  const auto& dists = game.noise().disturbances;
  const std::size_t J = game.noise().num_draws();
  if (J == 0) return out;
  const auto m = static_cast<Eigen::Index>(game.dim());

  std::vector<Matrix> D(J);
  std::vector<Vector> d(J);
  std::vector<double> var(J);
  Matrix second = Matrix::Zero(m, m);
  for (std::size_t j = 0; j < J; ++j) {
    D[j] = dense_direction(dists[j], m);
    d[j] = dense_offset(dists[j], m);
    var[j] = dists[j].half_width * dists[j].half_width / 3.0;
    second += var[j] * D[j].transpose() * D[j];
    out.beta += var[j] * d[j].squaredNorm();
  }
  out.alpha = std::max(0.0, top_eigenvalue(second));
  if (num_samples == 0) return out;

  // Empirical E[B~^T B~] from the sample second moments of the draws
  RngStream rng(seed);
  std::vector<double> draws;
  std::vector<std::vector<double>> all(num_samples);
  Matrix S = Matrix::Zero(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(J));
  for (std::size_t i = 0; i < num_samples; ++i) {
    game.draw(rng, draws);
    all[i] = draws;
    Eigen::Map<const Vector> v(draws.data(), static_cast<Eigen::Index>(J));
    S.noalias() += v * v.transpose();
  }
  S /= static_cast<double>(num_samples);
  Matrix emp = Matrix::Zero(m, m);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t k = 0; k < J; ++k) {
      const double s = S(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      if (s != 0.0) emp.noalias() += s * D[j].transpose() * D[k];
    }
  emp = 0.5 * (emp + emp.transpose());
  Vector top;
  out.alpha_empirical = std::max(0.0, top_eigenvalue(emp, &top));

  // delta method: the spread of |B~_i v|^2 along the top eigenvector
  std::vector<Vector> c(J);
  for (std::size_t j = 0; j < J; ++j) c[j] = D[j] * top;
  std::vector<double> za(num_samples), zb(num_samples);
  Vector acc(m), off(m);
  for (std::size_t i = 0; i < num_samples; ++i) {
    acc.setZero();
    off.setZero();
    for (std::size_t j = 0; j < J; ++j) {
      acc += all[i][j] * c[j];
      off += all[i][j] * d[j];
    }
    za[i] = acc.squaredNorm();
    zb[i] = off.squaredNorm();
  }
  double se = 0.0;
  mean_and_se(za, se);
  out.alpha_se = se;
  out.beta_empirical = mean_and_se(zb, se);
  out.beta_se = se;
  out.samples = num_samples;
  return out;
}

AnalysisConstants analysis_constants(const QuadraticGame& game, const ConstraintSet& cs,
                                     const PenaltyConfig& cfg, const StepSizes& steps,
                                     const NoiseConstants& noise) {
  AnalysisConstants c;
  auto mono = monotonicity_constants(game);
  auto lip = penalty_lipschitz_constants(cs, cfg, game.topology());
  c.nu = mono.nu;
  c.delta = mono.delta;
  c.delta_p = lip.delta_p;
  c.gamma = lip.gamma;
  c.rho = cfg.rho;
  c.mu_max = steps.mu_max();
  c.t = steps.t();
  c.alpha = noise.alpha;
  c.beta = noise.beta;
  return c;
}

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::sg_theorem2: return "sg_theorem2";
    case BoundKind::deterministic_theorem3: return "deterministic_theorem3";
    case BoundKind::stochastic_theorem4: return "stochastic_theorem4";
    case BoundKind::bias_theorem5: return "bias_theorem5";
  }
  return "?";
}

StepSizeBound step_size_bound(BoundKind kind, const AnalysisConstants& c) {
  StepSizeBound out;
  const double L = c.delta + c.rho * c.delta_p;
  const double nu_p = c.nu_p(), nu_pp = c.nu_pp();
  const double rd = c.rho * c.delta_p;
  out.t_bound = L > 0.0 ? c.nu / L : kInf;

  if (kind == BoundKind::sg_theorem2) {
    out.mu_bound = nu_p > 0.0 ? 2.0 * nu_p / (L * L + 2.0 * c.alpha) : 0.0;
  } else {
    // the stochastic version replaces delta^2 by delta^2 + 2 alpha throughout
    const double d2 = c.delta * c.delta + (kind == BoundKind::stochastic_theorem4 ? 2.0 * c.alpha : 0.0);
    out.rho_bound = c.delta_p > 0.0 ? std::sqrt(d2) / c.delta_p : 0.0;  // no penalty, no condition
    const double den = d2 + rd * rd - 4.0 * c.t * nu_pp * rd;
    const double first = den > 0.0 ? 2.0 * nu_p / den : kInf;
    const double second = (nu_p + (rd > 0.0 ? c.t * (rd * rd - d2) / rd : 0.0)) / d2;
    out.mu_bound = nu_p > 0.0 ? std::max(0.0, std::min(first, second)) : 0.0;
  }

  if (!(nu_p > 0.0))
    out.violated = "t < nu/(delta+rho*delta_p)";
  else if (kind != BoundKind::sg_theorem2 && c.delta_p > 0.0 && !(c.rho > out.rho_bound))
    out.violated = kind == BoundKind::stochastic_theorem4 ? "rho > sqrt(delta^2+2*alpha)/delta_p"
                                                          : "rho > delta/delta_p";
  else if (!(c.mu_max < out.mu_bound))
    out.violated = kind == BoundKind::sg_theorem2 ? "mu_max < 2*nu'/((delta+rho*delta_p)^2+2*alpha)"
                   : kind == BoundKind::stochastic_theorem4 ? "mu_max < mu'_o"
                                                            : "mu_max < mu_o";
  return out;
}

Vector penalized_gradient(const QuadraticGame& game, const ConstraintSet& cs,
                          const PenaltyConfig& cfg, const ActionProfile& w) {
  Vector f = block_gradient(game, w);
  if (cfg.rho != 0.0) add_penalty_gradient(cs, cfg, w, cfg.rho, f);
  return f;
}

ActionProfile solve_penalized_nash(const QuadraticGame& game, const ConstraintSet& cs,
                                   const PenaltyConfig& cfg, const SolveOptions& opt) {
  cfg.validate();
  Vector w = opt.initial ? *opt.initial : Vector::Zero(static_cast<Eigen::Index>(game.dim()));
  game.check_dims(w);
  auto residual = [&](const Vector& x) { return penalized_gradient(game, cs, cfg, x); };
  auto jacobian = [&](const Vector& x) -> Matrix {
    Matrix J = game.B();
    if (cfg.rho != 0.0) J += cfg.rho * penalty_hessian(cs, cfg, x);
    return J;
  };
  double r = newton(w, residual, jacobian, opt.tol, opt.max_newton);
  if (r <= opt.tol) return w;

  // plain w <- w - mu F^p(w), a contraction for mu = nu / L^2
  auto mono = monotonicity_constants(game);
  if (!mono.strongly_monotone())
    throw ConvergenceError("penalized Nash solve failed and F is not strongly monotone", r);
  const double L = mono.delta + cfg.rho * penalty_lipschitz_constants(cs, cfg, game.topology()).delta_p;
  const double mu = mono.nu / (L * L);
  for (std::size_t i = 0; i < opt.max_fallback; ++i) {
    Vector f = residual(w);
    r = f.norm();
    if (r <= opt.tol) return w;
    w -= mu * f;
  }
  throw ConvergenceError("penalized Nash solve hit the iteration cap", r);
}

Vector fixed_point_map(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                       const PenaltyConfig& cfg, const Vector& u, const Vector& w) {
  auto [c1, c2] = unified_coefficients(kind);
  Vector phi = w;
  if (c1 && cfg.rho != 0.0) phi -= cfg.rho * u.cwiseProduct(penalty_gradient(cs, cfg, w));
  Vector psi = phi - u.cwiseProduct(block_gradient(game, phi));
  Vector out = psi;
  if (c2 && cfg.rho != 0.0) out -= cfg.rho * u.cwiseProduct(penalty_gradient(cs, cfg, psi));
  return out;
}

FixedPoint solve_fixed_point(StrategyKind kind, const QuadraticGame& game, const ConstraintSet& cs,
                             const PenaltyConfig& cfg, const StepSizes& steps,
                             const SolveOptions& opt, bool strict) {
  cfg.validate();
  auto [c1, c2] = unified_coefficients(kind);
  const Vector u = steps.expand(game.topology());
  const auto m = static_cast<Eigen::Index>(game.dim());

  FixedPoint fp;
  const auto consts = analysis_constants(game, cs, cfg, steps, NoiseConstants{});
  fp.violated = step_size_bound(BoundKind::deterministic_theorem3, consts).violated;
  if (strict && !fp.violated.empty()) throw ConditionViolated("fixed point requires " + fp.violated);

  Vector w = opt.initial ? *opt.initial : solve_penalized_nash(game, cs, cfg, opt);
  game.check_dims(w);
  auto residual = [&](const Vector& x) -> Vector {
    return x - fixed_point_map(kind, game, cs, cfg, u, x);
  };
  const Matrix I = Matrix::Identity(m, m);
  const Matrix UB = u.asDiagonal() * game.B();
  auto jacobian = [&](const Vector& x) -> Matrix {
    if (cfg.rho == 0.0) return UB;
    if (c2) {
      Vector psi = x - u.cwiseProduct(block_gradient(game, x));
      Matrix P = cfg.rho * u.asDiagonal() * penalty_hessian(cs, cfg, psi);
      return I - (I - P) * (I - UB);
    }
    Matrix P = cfg.rho * u.asDiagonal() * penalty_hessian(cs, cfg, x);
    return I - (I - UB) * (I - P);
  };
  double r = newton(w, residual, jacobian, opt.tol, opt.max_newton);

  if (r > opt.tol) {
    // run the recursion itself, stopping on |w_i - w_{i-1}| <= tol (1 - kappa)
    const double kappa = contraction_modulus(consts);
    const double stop = kappa < 1.0 ? opt.tol * (1.0 - kappa) : opt.tol;
    for (std::size_t i = 0; i < opt.max_fallback && r > stop; ++i) {
      Vector next = fixed_point_map(kind, game, cs, cfg, u, w);
      r = (next - w).norm();
      w = std::move(next);
    }
    r = residual(w).norm();
    if (r > opt.tol) throw ConvergenceError("fixed-point solve hit the iteration cap", r);
  }

  fp.w = w;
  fp.phi = w;
  if (c1 && cfg.rho != 0.0) fp.phi -= cfg.rho * u.cwiseProduct(penalty_gradient(cs, cfg, w));
  fp.psi = fp.phi - u.cwiseProduct(block_gradient(game, fp.phi));
  fp.residual = r;
  return fp;
}

double contraction_a1(const AnalysisConstants& c) {
  const double mu = c.mu_max, rd = c.rho * c.delta_p, d2 = c.delta * c.delta;
  const double nu_p = c.nu_p(), nu_pp = c.nu_pp();
  return 2.0 * mu * nu_p - mu * mu * (d2 + rd * rd - 4.0 * c.t * nu_pp * rd) +
         mu * mu * mu * (rd * rd * nu_pp - c.t * rd * d2) - mu * mu * mu * mu * rd * rd * d2;
}

double contraction_modulus(const AnalysisConstants& c) {
  return std::sqrt(std::max(0.0, 1.0 - contraction_a1(c)));
}

double sg_msd_factor(const AnalysisConstants& c) {
  const double mu = c.mu_max, L = c.delta + c.rho * c.delta_p;
  return 1.0 - 2.0 * mu * c.nu_p() + mu * mu * (L * L + 2.0 * c.alpha);
}

BiasBound bias_bound(StrategyKind kind, const AnalysisConstants& c, double grad_norm_at_nash) {
  auto [c1, c2] = unified_coefficients(kind);
  const double mu = c.mu_max, rd = c.rho * c.delta_p;
  const double Y = 1.0 + 2.0 * c.t * mu * rd + mu * mu * rd * rd;
  const double Z = c1 * (1.0 + mu * c.delta) * c.delta + c2 * (1.0 + mu * rd) * rd;
  BiasBound out;
  out.a1 = contraction_a1(c);
  out.b = 2.0 * mu * mu * grad_norm_at_nash * std::sqrt(Y) * Z;
  out.eta = mu * mu * mu * mu * (c1 * c.delta * c.delta + c2 * rd * rd) * grad_norm_at_nash *
            grad_norm_at_nash;
  if (!(out.a1 > 0.0)) {
    out.bound = kInf;
    return out;
  }
  out.bound = out.b / out.a1 + std::sqrt(out.eta / out.a1 + out.b * out.b / (out.a1 * out.a1));
  return out;
}

}  // namespace gnep
