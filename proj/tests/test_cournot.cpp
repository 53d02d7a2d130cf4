#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gnep/cournot.hpp"
#include "gnep/io.hpp"
#include "support.hpp"

#include <cmath>
#include <set>

using namespace gnep;
using testing::random_vector;

TEST_CASE("three-factory matrix at x = y = 4") {
  auto cg = build_game(three_factory_example());
  Matrix golden(5, 5);
  // clang-format off
  golden << 16,  8,  0,  0,  0,
             8, 16,  0,  0,  4,
             0,  0, 16,  4,  0,
             0,  0,  4, 16,  8,
             0,  4,  0,  8, 16;
  // clang-format on
  CHECK(cg.game.B() == golden);
  CHECK(cg.game.B()(0, 0) == 16);
  CHECK(cg.game.B()(0, 1) == 8);
  CHECK(cg.game.b() == Vector::Constant(5, -12));
}

TEST_CASE("three-factory matrix with distinct parameters") {
  std::vector<double> x{1.5, 2.0, 3.25}, y{5.0, 7.0, 11.0};
  auto cg = build_game(testing::three_factory_spec(x, y, {9, 10, 13}));
  CHECK((cg.game.B() - testing::three_factory_matrix(x, y)).cwiseAbs().maxCoeff() == 0.0);
  Vector b(5);
  b << -9, -13, -10, -10, -13;
  CHECK(cg.game.b() == b);
}

TEST_CASE("decomposition certificate reconstructs B") {
  auto spec = three_factory_example();
  auto f = decomposition_certificate(spec);
  Vector xd = f.X.diagonal();
  Vector expect(5);
  expect << 2, 2, 2, 2, 2;  // sqrt(4) for every entry
  CHECK((xd - expect).norm() == 0.0);
  Matrix R = f.X * f.X.transpose() + f.Y1 * f.Y1.transpose() + f.Y2 * f.Y2.transpose();
  CHECK((R - build_game(spec).game.B()).cwiseAbs().maxCoeff() <= 1e-12);

  std::vector<double> x{1.5, 2.0, 3.25}, y{5.0, 7.0, 11.0};
  auto s2 = testing::three_factory_spec(x, y);
  auto f2 = decomposition_certificate(s2);
  Vector xd2(5);
  xd2 << std::sqrt(5.0), std::sqrt(11.0), std::sqrt(7.0), std::sqrt(7.0), std::sqrt(11.0);
  CHECK((f2.X.diagonal() - xd2).norm() <= 1e-15);
  Matrix R2 = f2.X * f2.X.transpose() + f2.Y1 * f2.Y1.transpose() + f2.Y2 * f2.Y2.transpose();
  CHECK((R2 - testing::three_factory_matrix(x, y)).cwiseAbs().maxCoeff() <= 1e-12);

  auto net = paper_network();
  auto fn = decomposition_certificate(net);
  Matrix Rn = fn.X * fn.X.transpose() + fn.Y1 * fn.Y1.transpose() + fn.Y2 * fn.Y2.transpose();
  CHECK((Rn - build_game(net).game.B()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradient formula at w = 0") {
  auto cg = build_game(three_factory_example());
  CHECK(block_gradient(cg.game, Vector::Zero(5))[0] == -12);
}

TEST_CASE("isolated supplier") {
  CournotSpec s;
  s.num_factories = 2;
  s.num_markets = 2;
  s.edges = {{0, 0}, {1, 1}, {0, 1}};
  s.x = {3, 5};
  s.y = {2, 7};
  s.q = {10, 10};
  s.h = {1, 1};
  auto cg = build_game(s);
  // factory 1 alone would be disconnected; here it shares market 1 with factory 0
  CHECK(cg.game.topology().are_neighbors(0, 1));

  CournotSpec lone;
  lone.num_factories = 1;
  lone.num_markets = 1;
  lone.edges = {{0, 0}};
  lone.x = {3};
  lone.y = {2};
  lone.q = {10};
  lone.h = {1};
  auto lg = build_game(lone);
  CHECK(lg.game.B().rows() == 1);
  CHECK(lg.game.B()(0, 0) == 2 * 3 + 2 * 2);
}

TEST_CASE("disconnected or invalid specs are rejected") {
  CournotSpec s;
  s.num_factories = 2;
  s.num_markets = 2;
  s.edges = {{0, 0}, {1, 1}};
  s.x = {1, 1};
  s.y = {1, 1};
  s.q = {1, 1};
  s.h = {1, 1};
  CHECK_THROWS_AS(build_game(s), StructuralError);

  auto bad = three_factory_example();
  bad.x[1] = 0.0;
  CHECK_THROWS_AS(build_game(bad), StructuralError);

  auto unserved = three_factory_example();
  unserved.edges = {{0, 0}, {1, 0}, {2, 2}, {0, 2}};
  CHECK_THROWS_AS(build_game(unserved), StructuralError);
}

TEST_CASE("constraint layout: nonnegativity then capacities") {
  auto cg = build_game(three_factory_example());
  CHECK(cg.constraints.inequalities().size() == 5 + 3);
  CHECK(cg.capacities.size() == 3);
  Vector w(5);
  w << 0.2, 0.3, 0.4, 0.5, 0.6;
  CHECK(cg.constraints.inequalities()[0].eval(w) == doctest::Approx(-0.2));
  CHECK(cg.capacities[0].eval(w) == doctest::Approx(0.2 - 1.0));
  CHECK(cg.capacities[1].eval(w) == doctest::Approx(0.4 + 0.5 - 1.0));
  CHECK(cg.capacities[2].eval(w) == doctest::Approx(0.3 + 0.6 - 1.0));
}

TEST_CASE("strong monotonicity floor on random directions") {
  for (auto spec : {three_factory_example(), paper_network()}) {
    auto cg = build_game(spec);
    const double floor = cournot_monotonicity_floor(spec);
    CHECK(floor == 4.0);
    CHECK(monotonicity_constants(cg.game).nu >= floor - 1e-12);
    RngStream rng(31);
    const auto m = static_cast<Eigen::Index>(cg.game.dim());
    for (int i = 0; i < 1000; ++i) {
      Vector a = random_vector(rng, m);
      CHECK(a.dot(cg.game.B() * a) >= floor * a.squaredNorm() - 1e-12);
    }
  }
}

TEST_CASE("evaluation network parameters") {
  auto s = paper_network();
  CHECK(s.num_factories == 20);
  CHECK(s.num_markets == 7);
  CHECK(s.x == std::vector<double>(20, 4.0));
  CHECK(s.q == std::vector<double>(7, 12.0));
  CHECK(s.y == std::vector<double>(7, 4.0));
  CHECK(s.h == std::vector<double>(7, 1.0));
  CHECK(s.noise_x == 4.0);
  CHECK(s.noise_y == 4.0);
  auto layout = cournot_layout(s);
  std::set<std::size_t> served;
  for (std::size_t k = 0; k < 20; ++k) {
    CHECK(layout.dims[k] >= 1);
    CHECK(layout.dims[k] <= 3);
  }
  for (auto [k, l] : s.edges) served.insert(l);
  CHECK(served.size() == 7);
  // connectivity is checked by the topology constructor
  CHECK_NOTHROW(build_game(s));
  CHECK(paper_network(kDefaultLayoutSeed).edges == s.edges);
  CHECK(paper_network(2).edges != s.edges);
}

TEST_CASE("agent cost gradients agree with the game") {
  auto spec = paper_network();
  auto cg = build_game(spec);
  const auto& layout = cg.layout;
  RngStream rng(17);
  const auto m = static_cast<Eigen::Index>(cg.game.dim());
  Vector w = random_vector(rng, m);
  Vector F = block_gradient(cg.game, w);
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t k = layout.factory[static_cast<std::size_t>(i)];
    Vector wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    const double fd = (cournot_agent_cost(spec, k, wp) - cournot_agent_cost(spec, k, wm)) / (2 * h);
    CHECK(std::abs(fd - F[i]) <= 1e-6 * std::max(1.0, std::abs(F[i])));
  }

  // same for one noisy realization
  std::vector<double> draws;
  cg.game.draw(rng, draws);
  Vector Fi = cg.game.realized_matrix(draws) * w + cg.game.realized_offset(draws);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t k = layout.factory[static_cast<std::size_t>(i)];
    Vector wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    const double fd =
        (cournot_agent_cost(spec, k, wp, draws) - cournot_agent_cost(spec, k, wm, draws)) / (2 * h);
    CHECK(std::abs(fd - Fi[i]) <= 1e-6 * std::max(1.0, std::abs(Fi[i])));
  }
}

TEST_CASE("sampled costs average to the mean cost") {
  auto spec = paper_network();
  auto cg = build_game(spec);
  const auto m = static_cast<Eigen::Index>(cg.game.dim());
  Vector w = Vector::Constant(m, 0.15);
  const std::size_t n = 100000;
  std::vector<double> sum(20, 0.0), sq(20, 0.0), draws;
  RngStream rng(99);
  for (std::size_t i = 0; i < n; ++i) {
    cg.game.draw(rng, draws);
    for (std::size_t k = 0; k < 20; ++k) {
      const double c = cournot_agent_cost(spec, k, w, draws);
      sum[k] += c;
      sq[k] += c * c;
    }
  }
  for (std::size_t k = 0; k < 20; ++k) {
    const double mean = sum[k] / n;
    const double se = std::sqrt((sq[k] / n - mean * mean) / (n - 1.0));
    CHECK(std::abs(mean - cournot_agent_cost(spec, k, w)) <= 4.0 * se);
  }
}

TEST_CASE("cournot JSON round trip") {
  auto spec = paper_network();
  Json j = cournot_to_json(spec);
  CHECK(j.at("N") == 20);
  CHECK(j.at("noise").at("vx") == 4.0);
  auto back = cournot_from_json(j);
  CHECK(back.edges == spec.edges);
  CHECK(build_game(back).game.B() == build_game(spec).game.B());
}
