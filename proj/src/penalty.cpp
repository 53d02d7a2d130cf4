#include "gnep/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gnep {

namespace {

// sorted by index, duplicates merged, zeros dropped
AffineConstraint normalized(AffineConstraint con) {
  auto& a = con.a;
  std::sort(a.begin(), a.end(),
            [](const VectorEntry& x, const VectorEntry& y) { return x.index < y.index; });
  std::vector<VectorEntry> merged;
  for (const auto& e : a) {
    if (!merged.empty() && merged.back().index == e.index)
      merged.back().value += e.value;
    else
      merged.push_back(e);
  }
  std::erase_if(merged, [](const VectorEntry& e) { return e.value == 0.0; });
  a = std::move(merged);
  return con;
}

bool same(const AffineConstraint& x, const AffineConstraint& y) {
  if (x.c != y.c || x.a.size() != y.a.size()) return false;
  for (std::size_t i = 0; i < x.a.size(); ++i)
    if (x.a[i].index != y.a[i].index || x.a[i].value != y.a[i].value) return false;
  return true;
}

bool insert_unique(std::vector<AffineConstraint>& list, AffineConstraint con) {
  con = normalized(std::move(con));
  if (!std::isfinite(con.c)) throw StructuralError("constraint offset must be finite");
  for (const auto& e : con.a)
    if (!std::isfinite(e.value)) throw StructuralError("constraint coefficients must be finite");
  for (const auto& have : list)
    if (same(have, con)) return false;
  list.push_back(std::move(con));
  return true;
}

void require_differentiable(const PenaltyConfig& cfg) {
  if (!cfg.differentiable())
    throw NonDifferentiableError("l1_exact inequality penalty has no gradient");
}

void check_indices(const ConstraintSet& cs, const ActionProfile& w) {
  auto m = static_cast<std::size_t>(w.size());
  auto bad = [m](const AffineConstraint& con) {
    return std::any_of(con.a.begin(), con.a.end(), [m](const VectorEntry& e) { return e.index >= m; });
  };
  for (const auto& h : cs.equalities())
    if (bad(h)) throw StructuralError("equality constraint indexes outside the action profile");
  for (const auto& g : cs.inequalities())
    if (bad(g)) throw StructuralError("inequality constraint indexes outside the action profile");
}

double norm_of(const AffineConstraint& con) {
  double s = 0.0;
  for (const auto& e : con.a) s += e.value * e.value;
  return std::sqrt(s);
}

}  // namespace

bool ConstraintSet::add_equality(AffineConstraint h) { return insert_unique(eq_, std::move(h)); }
bool ConstraintSet::add_inequality(AffineConstraint g) { return insert_unique(ineq_, std::move(g)); }

std::vector<std::size_t> ConstraintSet::members(const AffineConstraint& con, const Topology& topo) {
  std::vector<std::size_t> out;
  for (const auto& e : con.a) {
    if (e.index >= topo.total_dim()) throw StructuralError("constraint indexes outside the network");
    out.push_back(topo.owner(e.index));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void ConstraintSet::validate(const Topology& topo) const {
  auto check = [&](const AffineConstraint& con, const char* kind, std::size_t i) {
    auto mem = members(con, topo);
    for (std::size_t k : mem)
      for (std::size_t l : mem)
        if (!topo.are_neighbors(k, l))
          throw StructuralError(std::string(kind) + " " + std::to_string(i) + " couples agents " +
                                std::to_string(k) + " and " + std::to_string(l) +
                                " that are not neighbors");
  };
  for (std::size_t i = 0; i < eq_.size(); ++i) check(eq_[i], "equality", i);
  for (std::size_t i = 0; i < ineq_.size(); ++i) check(ineq_[i], "inequality", i);
}

void PenaltyConfig::validate() const {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw StructuralError("penalty parameter must be >= 0");
}

double penalty_value(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w) {
  check_indices(cs, w);
  double p = 0.0;
  for (const auto& h : cs.equalities()) p += theta_ep(h.eval(w));
  for (const auto& g : cs.inequalities()) {
    double r = g.eval(w);
    p += cfg.ineq_kind == IneqPenalty::l1_exact ? std::max(0.0, r) : theta_ip(r);
  }
  return p;
}

void add_penalty_gradient(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w,
                          double scale, Vector& out) {
  require_differentiable(cfg);
  for (const auto& h : cs.equalities()) {
    double d = scale * theta_ep_prime(h.eval(w));
    if (d != 0.0)
      for (const auto& e : h.a) out[e.index] += d * e.value;
  }
  for (const auto& g : cs.inequalities()) {
    double d = scale * theta_ip_prime(g.eval(w));
    if (d != 0.0)
      for (const auto& e : g.a) out[e.index] += d * e.value;
  }
}

Vector penalty_gradient(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w) {
  require_differentiable(cfg);
  check_indices(cs, w);
  Vector grad = Vector::Zero(w.size());
  add_penalty_gradient(cs, cfg, w, 1.0, grad);
  return grad;
}

Vector agent_penalty_gradient(const ConstraintSet& cs, const PenaltyConfig& cfg,
                              const Topology& topo, const ActionProfile& w, std::size_t k) {
  require_differentiable(cfg);
  check_indices(cs, w);
  const std::size_t lo = topo.offset(k), hi = lo + topo.dim(k);
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(topo.dim(k)));
  // only the w_k entries of the shared constraints contribute
  auto accumulate = [&](const AffineConstraint& con, double d) {
    for (const auto& e : con.a)
      if (e.index >= lo && e.index < hi) grad[static_cast<Eigen::Index>(e.index - lo)] += d * e.value;
  };
  for (const auto& h : cs.equalities()) accumulate(h, theta_ep_prime(h.eval(w)));
  for (const auto& g : cs.inequalities()) accumulate(g, theta_ip_prime(g.eval(w)));
  return grad;
}

Matrix penalty_hessian(const ConstraintSet& cs, const PenaltyConfig& cfg, const ActionProfile& w) {
  require_differentiable(cfg);
  check_indices(cs, w);
  Matrix H = Matrix::Zero(w.size(), w.size());
  auto rank_one = [&H](const AffineConstraint& con, double weight) {
    for (const auto& x : con.a)
      for (const auto& y : con.a) H(x.index, y.index) += weight * x.value * y.value;
  };
  for (const auto& h : cs.equalities()) rank_one(h, 2.0);
  for (const auto& g : cs.inequalities())
    if (g.eval(w) > 0.0) rank_one(g, 1.0);
  return H;
}

PenaltyLipschitz penalty_lipschitz_constants(const ConstraintSet& cs, const PenaltyConfig& cfg,
                                             const Topology& topo, double box_radius) {
  require_differentiable(cfg);
  if (!(box_radius > 0.0)) throw StructuralError("box radius must be positive");
  PenaltyLipschitz out;
  out.gamma.assign(topo.num_agents(), 0.0);
  std::vector<double> part(topo.num_agents());
  auto add = [&](const AffineConstraint& con, double factor) {
    std::fill(part.begin(), part.end(), 0.0);
    for (const auto& e : con.a) part.at(topo.owner(e.index)) += e.value * e.value;
    double full = norm_of(con);
    for (std::size_t k = 0; k < part.size(); ++k)
      out.gamma[k] += factor * std::sqrt(part[k]) * full;
  };
  for (const auto& h : cs.equalities()) add(h, 2.0);
  for (const auto& g : cs.inequalities()) add(g, 1.0);
  double s = 0.0;
  for (double g : out.gamma) s += g * g;
  out.delta_p = std::sqrt(s);
  return out;
}

}  // namespace gnep
