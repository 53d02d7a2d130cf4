#pragma once

#include "gnep/rng.hpp"
#include "gnep/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace gnep {

/// Agents, their action dimensions and their neighborhoods.
///
/// Every neighborhood contains its own agent, the relation is symmetric and
/// the induced graph is connected; the constructor rejects anything else.
class Topology {
public:
  Topology(std::vector<std::size_t> dims, std::vector<std::vector<std::size_t>> neighborhoods);

  std::size_t num_agents() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t k) const { return dims_.at(k); }
  std::size_t offset(std::size_t k) const { return offsets_.at(k); }
  /// M = sum of all M_k.
  std::size_t total_dim() const noexcept { return offsets_.back(); }
  /// M^k = sum of M_l over l in N_k.
  std::size_t neighborhood_dim(std::size_t k) const;

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  const std::vector<std::size_t>& neighborhood(std::size_t k) const { return neighborhoods_.at(k); }
  bool are_neighbors(std::size_t k, std::size_t l) const;
  /// Agent owning entry `index` of the stacked vector.
  std::size_t owner(std::size_t index) const { return owner_.at(index); }

  auto block(const Vector& w, std::size_t k) const { return w.segment(offset(k), dim(k)); }
  auto block(Vector& w, std::size_t k) const { return w.segment(offset(k), dim(k)); }

  /// w^k: the actions of agent k's neighborhood, in neighborhood order.
  Vector gather(const Vector& w, std::size_t k) const;

private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<std::size_t>> neighborhoods_;
  std::vector<std::size_t> owner_;
};

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

struct VectorEntry {
  std::size_t index;
  double value;
};

/// One zero-mean scalar disturbance v ~ U[-half_width, half_width] entering
/// the gradient realization as v * (D w + d). A disturbance perturbs either
/// the matrix (D) or the offset (d), never both.
struct Disturbance {
  double half_width = 0.0;
  std::vector<MatrixEntry> matrix;
  std::vector<VectorEntry> offset;
};

enum class NoiseKind { none, additive_uniform };

struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  std::vector<Disturbance> disturbances;

  static NoiseModel none() { return {}; }
  std::size_t num_draws() const noexcept {
    return kind == NoiseKind::none ? 0 : disturbances.size();
  }
};

/// Networked game with quadratic risks: F(w) = B w + b, with realizations
/// B_i = B + sum_j v_j D_j and b_i = b + sum_j v_j d_j.
class QuadraticGame {
public:
  QuadraticGame(Topology topology, Matrix B, Vector b, NoiseModel noise = NoiseModel::none());

  const Topology& topology() const noexcept { return topology_; }
  const Matrix& B() const noexcept { return B_; }
  const Vector& b() const noexcept { return b_; }
  const NoiseModel& noise() const noexcept { return noise_; }
  std::size_t dim() const noexcept { return topology_.total_dim(); }

  /// Draws one realization of the disturbances (empty when noise-free).
  void draw(RngStream& rng, std::vector<double>& draws) const;

  /// s(w) = Q(w) - F(w) for the given disturbance draws.
  Vector gradient_noise(const ActionProfile& w, std::span<const double> draws) const;

  /// Adds the gradient noise for `draws` into `out` (no allocation).
  void add_gradient_noise(const ActionProfile& w, std::span<const double> draws, Vector& out) const;

  /// Dense realization B_i for given draws.
  Matrix realized_matrix(std::span<const double> draws) const;
  Vector realized_offset(std::span<const double> draws) const;

  /// J_k(w) up to terms independent of w_k; its gradient in w_k is F_k(w).
  double agent_cost(std::size_t k, const ActionProfile& w) const;

  void check_dims(const ActionProfile& w) const;

private:
  Topology topology_;
  Matrix B_;
  Vector b_;
  NoiseModel noise_;
};

/// F(w) = B w + b.
Vector block_gradient(const QuadraticGame& game, const ActionProfile& w);

/// Q_i(w) = B_i w + b_i for one fresh realization drawn from `rng`.
Vector sample_gradient(const QuadraticGame& game, const ActionProfile& w, RngStream& rng);

struct MonotonicityConstants {
  double nu = 0.0;     ///< lambda_min((B + B^T) / 2)
  double delta = 0.0;  ///< sigma_max(B)

  bool strongly_monotone() const noexcept { return nu > 0.0; }
};

/// nu and delta of F. A non-positive nu is reported, not thrown.
MonotonicityConstants monotonicity_constants(const QuadraticGame& game);

}  // namespace gnep
