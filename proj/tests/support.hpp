#pragma once

#include "gnep/cournot.hpp"
#include "gnep/game.hpp"
#include "gnep/penalty.hpp"
#include "gnep/rng.hpp"

#include <cmath>
#include <vector>

namespace testing {

using gnep::Matrix;
using gnep::Vector;

inline Vector random_vector(gnep::RngStream& rng, Eigen::Index n, double half_width = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.symmetric(half_width);
  return v;
}

inline gnep::Topology single_agent(std::size_t dim = 1) { return gnep::Topology({dim}, {{0}}); }

inline gnep::QuadraticGame scalar_game(double B, double b, gnep::NoiseModel noise = {}) {
  return gnep::QuadraticGame(single_agent(), Matrix::Constant(1, 1, B), Vector::Constant(1, b),
                             std::move(noise));
}

/// J = (w - 1)^2, i.e. F(w) = 2w - 2.
inline gnep::QuadraticGame unit_quadratic() { return scalar_game(2.0, -2.0); }

inline gnep::AffineConstraint affine(std::vector<gnep::VectorEntry> a, double c) {
  return {std::move(a), c};
}

/// Entries of the three-factory example, written out by hand from the cost
/// derivatives (factory 0 -> markets 0, 2; factory 1 -> 1; factory 2 -> 1, 2).
inline Matrix three_factory_matrix(const std::vector<double>& x, const std::vector<double>& y) {
  Matrix B(5, 5);
  // clang-format off
  B << 2*x[0] + 2*y[0], 2*x[0],          0,               0,               0,
       2*x[0],          2*x[0] + 2*y[2], 0,               0,               y[2],
       0,               0,               2*x[1] + 2*y[1], y[1],            0,
       0,               0,               y[1],            2*x[2] + 2*y[1], 2*x[2],
       0,               y[2],            0,               2*x[2],          2*x[2] + 2*y[2];
  // clang-format on
  return B;
}

inline gnep::CournotSpec three_factory_spec(std::vector<double> x, std::vector<double> y,
                                            std::vector<double> q = {12, 12, 12}) {
  gnep::CournotSpec s;
  s.num_factories = 3;
  s.num_markets = 3;
  s.edges = {{0, 0}, {0, 2}, {1, 1}, {2, 1}, {2, 2}};
  s.x = std::move(x);
  s.y = std::move(y);
  s.q = std::move(q);
  s.h = {1, 1, 1};
  return s;
}

}  // namespace testing
