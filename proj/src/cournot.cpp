#include "gnep/cournot.hpp"

#include "gnep/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace gnep {

namespace {

void require_positive(const std::vector<double>& v, std::size_t n, const char* name) {
  if (v.size() != n)
    throw StructuralError(std::string(name) + " has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(n));
  for (double e : v)
    if (!(e > 0.0) || !std::isfinite(e))
      throw StructuralError(std::string(name) + " entries must be positive and finite");
}

std::vector<std::vector<std::size_t>> suppliers_by_market(const CournotLayout& lay, std::size_t L) {
  std::vector<std::vector<std::size_t>> rows(L);
  for (std::size_t i = 0; i < lay.market.size(); ++i) rows[lay.market[i]].push_back(i);
  return rows;
}

}  // namespace

void CournotSpec::validate() const {
  if (num_factories == 0 || num_markets == 0)
    throw StructuralError("need at least one factory and one market");
  require_positive(x, num_factories, "x");
  require_positive(q, num_markets, "q");
  require_positive(y, num_markets, "y");
  if (h.size() != num_markets) throw StructuralError("h must have one entry per market");
  for (double e : h)
    if (!std::isfinite(e)) throw StructuralError("capacities must be finite");
  if (!(noise_x >= 0.0) || !(noise_y >= 0.0)) throw StructuralError("noise half widths must be >= 0");

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::size_t> per_factory(num_factories, 0), per_market(num_markets, 0);
  for (auto [k, l] : edges) {
    if (k >= num_factories || l >= num_markets)
      throw StructuralError("edge (" + std::to_string(k) + "," + std::to_string(l) + ") out of range");
    if (!seen.insert({k, l}).second)
      throw StructuralError("duplicate edge (" + std::to_string(k) + "," + std::to_string(l) + ")");
    ++per_factory[k];
    ++per_market[l];
  }
  for (std::size_t k = 0; k < num_factories; ++k)
    if (per_factory[k] == 0) throw StructuralError("factory " + std::to_string(k) + " serves no market");
  for (std::size_t l = 0; l < num_markets; ++l)
    if (per_market[l] == 0) throw StructuralError("market " + std::to_string(l) + " has no supplier");
}

CournotLayout cournot_layout(const CournotSpec& spec) {
  spec.validate();
  CournotLayout lay;
  lay.dims.assign(spec.num_factories, 0);
  for (auto [k, l] : spec.edges) ++lay.dims[k];
  lay.offset.assign(spec.num_factories, 0);
  std::partial_sum(lay.dims.begin(), lay.dims.end() - 1, lay.offset.begin() + 1);
  const std::size_t m = std::accumulate(lay.dims.begin(), lay.dims.end(), std::size_t{0});
  lay.factory.assign(m, 0);
  lay.market.assign(m, 0);
  std::vector<std::size_t> fill = lay.offset;
  for (auto [k, l] : spec.edges) {
    std::size_t i = fill[k]++;
    lay.factory[i] = k;
    lay.market[i] = l;
  }
  return lay;
}

CournotGame build_game(const CournotSpec& spec) {
  CournotLayout lay = cournot_layout(spec);
  const std::size_t N = spec.num_factories, L = spec.num_markets, M = lay.market.size();
  const auto by_market = suppliers_by_market(lay, L);

  std::vector<std::vector<std::size_t>> nbhd(N);
  for (std::size_t k = 0; k < N; ++k) nbhd[k].push_back(k);
  for (const auto& rows : by_market)
    for (std::size_t i : rows)
      for (std::size_t j : rows) nbhd[lay.factory[i]].push_back(lay.factory[j]);
  Topology topo(lay.dims, std::move(nbhd));

  // dJ_k/dw_k(u) = 2 x_k sum_u' w_k(u') - q_l + y_l r(l) + y_l w_k(u)
  Matrix B = Matrix::Zero(M, M);
  Vector b(M);
  for (std::size_t i = 0; i < M; ++i) {
    const std::size_t k = lay.factory[i], l = lay.market[i];
    for (std::size_t j = lay.offset[k]; j < lay.offset[k] + lay.dims[k]; ++j) B(i, j) += 2.0 * spec.x[k];
    for (std::size_t j : by_market[l]) B(i, j) += spec.y[l];
    B(i, i) += spec.y[l];
    b[i] = -spec.q[l];
  }

  NoiseModel noise;
  if (spec.noise_x > 0.0 || spec.noise_y > 0.0) {
    noise.kind = NoiseKind::additive_uniform;
    for (std::size_t k = 0; k < N; ++k) {
      Disturbance d{spec.noise_x, {}, {}};
      for (std::size_t i = lay.offset[k]; i < lay.offset[k] + lay.dims[k]; ++i)
        for (std::size_t j = lay.offset[k]; j < lay.offset[k] + lay.dims[k]; ++j)
          d.matrix.push_back({i, j, 2.0});
      noise.disturbances.push_back(std::move(d));
    }
    for (std::size_t l = 0; l < L; ++l) {
      Disturbance d{spec.noise_y, {}, {}};
      for (std::size_t i : by_market[l]) {
        for (std::size_t j : by_market[l]) d.matrix.push_back({i, j, i == j ? 2.0 : 1.0});
      }
      noise.disturbances.push_back(std::move(d));
    }
  }

  ConstraintSet cs;
  std::vector<AffineConstraint> caps;
  for (std::size_t i = 0; i < M; ++i) cs.add_inequality({{{i, -1.0}}, 0.0});
  for (std::size_t l = 0; l < L; ++l) {
    AffineConstraint cap;
    for (std::size_t i : by_market[l]) cap.a.push_back({i, 1.0});
    cap.c = -spec.h[l];
    caps.push_back(cap);
    cs.add_inequality(cap);
  }

  QuadraticGame game(std::move(topo), std::move(B), std::move(b), std::move(noise));
  cs.validate(game.topology());
  return {std::move(game), std::move(cs), std::move(caps), std::move(lay)};
}

CournotFactors decomposition_certificate(const CournotSpec& spec) {
  CournotLayout lay = cournot_layout(spec);
  const std::size_t M = lay.market.size();
  CournotFactors f{Matrix::Zero(M, M), Matrix::Zero(M, spec.num_factories),
                   Matrix::Zero(M, spec.num_markets)};
  for (std::size_t i = 0; i < M; ++i) {
    const std::size_t k = lay.factory[i], l = lay.market[i];
    f.X(i, i) = std::sqrt(spec.y[l]);
    f.Y1(i, k) = std::sqrt(2.0 * spec.x[k]);
    f.Y2(i, l) = std::sqrt(spec.y[l]);
  }
  return f;
}

double cournot_monotonicity_floor(const CournotSpec& spec) {
  spec.validate();
  // X X^T = diag(y) is the only term bounded below by a multiple of |a|^2
  return *std::min_element(spec.y.begin(), spec.y.end());
}

double cournot_agent_cost(const CournotSpec& spec, std::size_t k, const ActionProfile& w,
                          std::span<const double> draws) {
  CournotLayout lay = cournot_layout(spec);
  const std::size_t N = spec.num_factories, L = spec.num_markets;
  if (static_cast<std::size_t>(w.size()) != lay.market.size())
    throw StructuralError("action profile does not match the Cournot layout");
  if (!draws.empty() && draws.size() != N + L)
    throw StructuralError("expected " + std::to_string(N + L) + " disturbance draws");
  if (k >= N) throw StructuralError("factory index out of range");

  std::vector<double> r(L, 0.0);
  for (std::size_t i = 0; i < lay.market.size(); ++i) r[lay.market[i]] += w[i];

  const double xk = spec.x[k] + (draws.empty() ? 0.0 : draws[k]);
  double produced = 0.0, revenue = 0.0;
  for (std::size_t i = lay.offset[k]; i < lay.offset[k] + lay.dims[k]; ++i) {
    const std::size_t l = lay.market[i];
    const double yl = spec.y[l] + (draws.empty() ? 0.0 : draws[N + l]);
    produced += w[i];
    revenue += (spec.q[l] - yl * r[l]) * w[i];
  }
  return xk * produced * produced - revenue;
}

CournotSpec paper_network(std::uint64_t seed_layout) {
  constexpr std::size_t N = 20, L = 7, kMaxMarkets = 3;
  CournotSpec spec;
  spec.num_factories = N;
  spec.num_markets = L;
  spec.x.assign(N, 4.0);
  spec.q.assign(L, 12.0);
  spec.y.assign(L, 4.0);
  spec.h.assign(L, 1.0);
  spec.noise_x = 4.0;
  spec.noise_y = 4.0;

  RngStream rng(seed_layout);
  for (;;) {
    spec.edges.clear();
    for (std::size_t k = 0; k < N; ++k) {
      std::size_t served = 1 + rng.below(kMaxMarkets);
      std::vector<std::size_t> pool(L);
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t j = 0; j < served; ++j)
        std::swap(pool[j], pool[j + rng.below(L - j)]);
      std::sort(pool.begin(), pool.begin() + served);
      for (std::size_t j = 0; j < served; ++j) spec.edges.emplace_back(k, pool[j]);
    }
    try {
      build_game(spec);
      return spec;
    } catch (const StructuralError&) {
      // unserved market or disconnected graph: draw again
    }
  }
}

CournotSpec three_factory_example(double x, double y, double q) {
  CournotSpec spec;
  spec.num_factories = 3;
  spec.num_markets = 3;
  spec.edges = {{0, 0}, {0, 2}, {1, 1}, {2, 1}, {2, 2}};
  spec.x.assign(3, x);
  spec.y.assign(3, y);
  spec.q.assign(3, q);
  spec.h.assign(3, 1.0);
  return spec;
}

}  // namespace gnep
