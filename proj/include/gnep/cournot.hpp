#pragma once

#include "gnep/game.hpp"
#include "gnep/penalty.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace gnep {

/// Network Cournot competition: factory k ships w_k(u) to the u-th market it
/// serves, pays x_k (sum_u w_k(u))^2 and sells at price q_l - y_l r(l), where
/// r(l) is the total delivery into market l.
struct CournotSpec {
  std::size_t num_factories = 0;
  std::size_t num_markets = 0;
  /// (factory, market) pairs; a factory's entries are ordered as listed.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<double> x;
  std::vector<double> q;
  std::vector<double> y;
  std::vector<double> h;
  double noise_x = 0.0;  ///< half width of the disturbance on each x_k
  double noise_y = 0.0;  ///< half width of the disturbance on each y_l

  void validate() const;
};

/// Where each entry of the stacked action vector goes.
struct CournotLayout {
  std::vector<std::size_t> dims;    ///< markets served per factory
  std::vector<std::size_t> factory; ///< per entry
  std::vector<std::size_t> market;  ///< per entry
  std::vector<std::size_t> offset;  ///< per factory, into the stacked vector
};

CournotLayout cournot_layout(const CournotSpec& spec);

struct CournotGame {
  QuadraticGame game;
  /// nonnegativity -w <= 0 for every entry, then capacity r(l) - h_l <= 0
  ConstraintSet constraints;
  /// capacity rows only, indexed by market
  std::vector<AffineConstraint> capacities;
  CournotLayout layout;
};

/// Disturbances are ordered factory draws first (v_x,k), then market draws
/// (v_y,l); the market draw is shared by all factories serving that market.
CournotGame build_game(const CournotSpec& spec);

struct CournotFactors {
  Matrix X;   ///< M x M, diag sqrt(y) of each entry's market
  Matrix Y1;  ///< M x N, sqrt(2 x_k) on factory k's rows
  Matrix Y2;  ///< M x L, sqrt(y_l) on the rows delivering into l
};

/// B = X X^T + Y1 Y1^T + Y2 Y2^T.
CournotFactors decomposition_certificate(const CournotSpec& spec);

/// Guaranteed lower bound on a^T B a / |a|^2 from the factorization.
double cournot_monotonicity_floor(const CournotSpec& spec);

/// Factory k's realized cost at w. `draws` follows build_game's disturbance
/// order; empty means the mean parameters.
double cournot_agent_cost(const CournotSpec& spec, std::size_t k, const ActionProfile& w,
                          std::span<const double> draws = {});

inline constexpr std::uint64_t kDefaultLayoutSeed = 1;

/// The evaluation network: 20 factories, 7 markets, x = y = 4, q = 12, h = 1,
/// both noise half widths 4. Each factory serves 1 to 3 markets drawn from a
/// stream seeded by `seed_layout`; layouts leaving a market unserved or the
/// agent graph disconnected are redrawn.
CournotSpec paper_network(std::uint64_t seed_layout = kDefaultLayoutSeed);

/// Example network with three factories and three markets.
CournotSpec three_factory_example(double x = 4.0, double y = 4.0, double q = 12.0);

}  // namespace gnep
