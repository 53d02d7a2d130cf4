#pragma once

#include "gnep/game.hpp"
#include "gnep/types.hpp"

#include <cstddef>
#include <vector>

namespace gnep {

/// a^T w + c, with `a` kept sparse as (index, coefficient) pairs.
struct AffineConstraint {
  std::vector<VectorEntry> a;
  double c = 0.0;

  double eval(const Vector& w) const {
    double r = c;
    for (const auto& e : a) r += e.value * w[e.index];
    return r;
  }
};

/// Shared constraints: equalities h_u(w) = 0 and inequalities g_q(w) <= 0.
/// Repeated constraints are dropped on insertion.
class ConstraintSet {
public:
  /// Returns false when an identical constraint is already present.
  bool add_equality(AffineConstraint h);
  bool add_inequality(AffineConstraint g);

  const std::vector<AffineConstraint>& equalities() const noexcept { return eq_; }
  const std::vector<AffineConstraint>& inequalities() const noexcept { return ineq_; }
  std::size_t size() const noexcept { return eq_.size() + ineq_.size(); }
  bool empty() const noexcept { return size() == 0; }

  /// Agents whose actions appear in the constraint, ascending.
  static std::vector<std::size_t> members(const AffineConstraint& con, const Topology& topo);

  /// Every constraint's support must be pairwise within neighborhoods.
  void validate(const Topology& topo) const;

private:
  std::vector<AffineConstraint> eq_;
  std::vector<AffineConstraint> ineq_;
};

enum class EqPenalty { quadratic };
enum class IneqPenalty { half_quadratic, l1_exact };

struct PenaltyConfig {
  double rho = 0.0;
  EqPenalty eq_kind = EqPenalty::quadratic;
  IneqPenalty ineq_kind = IneqPenalty::half_quadratic;

  bool differentiable() const noexcept { return ineq_kind != IneqPenalty::l1_exact; }
  void validate() const;
};

inline double theta_ep(double x) { return x * x; }
inline double theta_ep_prime(double x) { return 2.0 * x; }
inline double theta_ip(double x) { return x > 0.0 ? 0.5 * x * x : 0.0; }
// derivative is continuous at the kink, theta_ip'(0) = 0 either way
inline double theta_ip_prime(double x) { return x > 0.0 ? x : 0.0; }

/// p(w): unweighted by rho.
double penalty_value(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w);

/// grad p(w), stacked over agents. Throws NonDifferentiableError for l1_exact.
Vector penalty_gradient(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w);

/// out += scale * grad p(w), without allocating.
void add_penalty_gradient(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w,
                          double scale, Vector& out);

/// grad_{w_k} p_k(w^k), where p_k only sums the constraints agent k shares in.
Vector agent_penalty_gradient(const ConstraintSet& cs, const PenaltyConfig& cfg,
                              const Topology& topo, const ActionProfile& w, std::size_t k);

/// Generalized Hessian of p at w: 2 a a^T per equality plus a a^T per
/// inequality with g(w) > 0.
Matrix penalty_hessian(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w);

struct PenaltyLipschitz {
  std::vector<double> gamma;  ///< per agent
  double delta_p = 0.0;
};

/// Analytic Lipschitz constants of the per-agent penalty gradients. For affine
/// constraints they hold globally; box_radius is only validated.
PenaltyLipschitz penalty_lipschitz_constants(const ConstraintSet& cs, const PenaltyConfig& cfg,
                                             const Topology& topo, double box_radius = 1.0);

}  // namespace gnep
