#include "gnep/game.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace gnep {

namespace {

std::string agent_str(std::size_t k) { return "agent " + std::to_string(k); }

}  // namespace

Topology::Topology(std::vector<std::size_t> dims,
                   std::vector<std::vector<std::size_t>> neighborhoods)
    : dims_(std::move(dims)), neighborhoods_(std::move(neighborhoods)) {
  const std::size_t n = dims_.size();
  if (n == 0) throw StructuralError("topology needs at least one agent");
  if (neighborhoods_.size() != n)
    throw StructuralError("expected " + std::to_string(n) + " neighborhoods, got " +
                          std::to_string(neighborhoods_.size()));

  offsets_.assign(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (dims_[k] == 0) throw StructuralError(agent_str(k) + " has an empty action");
    offsets_[k + 1] = offsets_[k] + dims_[k];
  }
  owner_.resize(offsets_.back());
  for (std::size_t k = 0; k < n; ++k)
    std::fill(owner_.begin() + offsets_[k], owner_.begin() + offsets_[k + 1], k);

  for (std::size_t k = 0; k < n; ++k) {
    auto& nb = neighborhoods_[k];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    if (!nb.empty() && nb.back() >= n)
      throw StructuralError(agent_str(k) + " lists unknown neighbor " + std::to_string(nb.back()));
    if (!std::binary_search(nb.begin(), nb.end(), k))
      throw StructuralError(agent_str(k) + " is missing from its own neighborhood");
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l : neighborhoods_[k])
      if (!are_neighbors(l, k))
        throw StructuralError("neighborhoods not symmetric: " + std::to_string(l) + " in N_" +
                              std::to_string(k) + " but not the reverse");

  // BFS from agent 0
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!todo.empty()) {
    std::size_t k = todo.front();
    todo.pop();
    for (std::size_t l : neighborhoods_[k])
      if (!seen[l]) {
        seen[l] = true;
        ++reached;
        todo.push(l);
      }
  }
  if (reached != n)
    throw StructuralError("agent graph is disconnected (" + std::to_string(reached) + " of " +
                          std::to_string(n) + " agents reachable)");
}

std::size_t Topology::neighborhood_dim(std::size_t k) const {
  std::size_t m = 0;
  for (std::size_t l : neighborhood(k)) m += dims_[l];
  return m;
}

bool Topology::are_neighbors(std::size_t k, std::size_t l) const {
  const auto& nb = neighborhoods_.at(k);
  return std::binary_search(nb.begin(), nb.end(), l);
}

Vector Topology::gather(const Vector& w, std::size_t k) const {
  Vector out(neighborhood_dim(k));
  std::size_t pos = 0;
  for (std::size_t l : neighborhood(k)) {
    out.segment(pos, dims_[l]) = block(w, l);
    pos += dims_[l];
  }
  return out;
}

QuadraticGame::QuadraticGame(Topology topology, Matrix B, Vector b, NoiseModel noise)
    : topology_(std::move(topology)), B_(std::move(B)), b_(std::move(b)), noise_(std::move(noise)) {
  const auto m = static_cast<Eigen::Index>(topology_.total_dim());
  if (B_.rows() != m || B_.cols() != m)
    throw StructuralError("B is " + std::to_string(B_.rows()) + "x" + std::to_string(B_.cols()) +
                          ", expected " + std::to_string(m) + "x" + std::to_string(m));
  if (b_.size() != m)
    throw StructuralError("b has length " + std::to_string(b_.size()) + ", expected " +
                          std::to_string(m));
  if (!B_.allFinite() || !b_.allFinite()) throw StructuralError("B and b must be finite");

  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (B_(i, j) != 0.0 && !topology_.are_neighbors(topology_.owner(i), topology_.owner(j)))
        throw StructuralError("B(" + std::to_string(i) + "," + std::to_string(j) +
                              ") couples non-neighbors");

  // Each F_k must be the w_k-gradient of some J_k, so the diagonal blocks are symmetric.
  const double scale = std::max(1.0, B_.cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < topology_.num_agents(); ++k) {
    auto o = static_cast<Eigen::Index>(topology_.offset(k));
    auto d = static_cast<Eigen::Index>(topology_.dim(k));
    auto blk = B_.block(o, o, d, d);
    if ((blk - blk.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw StructuralError("diagonal block of " + agent_str(k) + " is not symmetric");
  }

  if (noise_.kind == NoiseKind::none) noise_.disturbances.clear();
  for (std::size_t j = 0; j < noise_.disturbances.size(); ++j) {
    const auto& dist = noise_.disturbances[j];
    const std::string tag = "disturbance " + std::to_string(j);
    if (!(dist.half_width >= 0.0) || !std::isfinite(dist.half_width))
      throw StructuralError(tag + " has an invalid half width");
    if (!dist.matrix.empty() && !dist.offset.empty())
      throw StructuralError(tag + " perturbs both B and b");
    for (const auto& e : dist.matrix) {
      if (e.row >= topology_.total_dim() || e.col >= topology_.total_dim())
        throw StructuralError(tag + " indexes outside B");
      if (!topology_.are_neighbors(topology_.owner(e.row), topology_.owner(e.col)))
        throw StructuralError(tag + " couples non-neighbors");
    }
    for (const auto& e : dist.offset)
      if (e.index >= topology_.total_dim()) throw StructuralError(tag + " indexes outside b");
  }
}

void QuadraticGame::check_dims(const ActionProfile& w) const {
  if (static_cast<std::size_t>(w.size()) != dim())
    throw StructuralError("action profile has length " + std::to_string(w.size()) +
                          ", game expects " + std::to_string(dim()));
}

void QuadraticGame::draw(RngStream& rng, std::vector<double>& draws) const {
  draws.resize(noise_.num_draws());
  for (std::size_t j = 0; j < draws.size(); ++j)
    draws[j] = rng.symmetric(noise_.disturbances[j].half_width);
}

void QuadraticGame::add_gradient_noise(const ActionProfile& w, std::span<const double> draws,
                                       Vector& out) const {
  if (draws.size() != noise_.num_draws())
    throw StructuralError("expected " + std::to_string(noise_.num_draws()) +
                          " disturbance draws, got " + std::to_string(draws.size()));
  for (std::size_t j = 0; j < draws.size(); ++j) {
    const double v = draws[j];
    const auto& dist = noise_.disturbances[j];
    for (const auto& e : dist.matrix) out[e.row] += v * e.value * w[e.col];
    for (const auto& e : dist.offset) out[e.index] += v * e.value;
  }
}

Vector QuadraticGame::gradient_noise(const ActionProfile& w, std::span<const double> draws) const {
  check_dims(w);
  Vector s = Vector::Zero(w.size());
  add_gradient_noise(w, draws, s);
  return s;
}

Matrix QuadraticGame::realized_matrix(std::span<const double> draws) const {
  Matrix out = B_;
  for (std::size_t j = 0; j < draws.size(); ++j)
    for (const auto& e : noise_.disturbances.at(j).matrix) out(e.row, e.col) += draws[j] * e.value;
  return out;
}

Vector QuadraticGame::realized_offset(std::span<const double> draws) const {
  Vector out = b_;
  for (std::size_t j = 0; j < draws.size(); ++j)
    for (const auto& e : noise_.disturbances.at(j).offset) out[e.index] += draws[j] * e.value;
  return out;
}

double QuadraticGame::agent_cost(std::size_t k, const ActionProfile& w) const {
  check_dims(w);
  auto o = static_cast<Eigen::Index>(topology_.offset(k));
  auto d = static_cast<Eigen::Index>(topology_.dim(k));
  Vector wk = w.segment(o, d);
  // own block enters quadratically, the rest linearly
  Vector cross = B_.middleRows(o, d) * w - B_.block(o, o, d, d) * wk;
  return 0.5 * wk.dot(B_.block(o, o, d, d) * wk) + wk.dot(cross) + wk.dot(b_.segment(o, d));
}

Vector block_gradient(const QuadraticGame& game, const ActionProfile& w) {
  game.check_dims(w);
  Vector f = game.B() * w;
  f += game.b();
  return f;
}

Vector sample_gradient(const QuadraticGame& game, const ActionProfile& w, RngStream& rng) {
  Vector q = block_gradient(game, w);
  std::vector<double> draws;
  game.draw(rng, draws);
  game.add_gradient_noise(w, draws, q);
  return q;
}

MonotonicityConstants monotonicity_constants(const QuadraticGame& game) {
  const Matrix& B = game.B();
  Matrix sym = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  Eigen::JacobiSVD<Matrix> svd(B);
  MonotonicityConstants c;
  c.nu = eig.eigenvalues().minCoeff();
  c.delta = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  return c;
}

}  // namespace gnep
