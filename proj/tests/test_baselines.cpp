#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gnep/baselines.hpp"
#include "gnep/cournot.hpp"
#include "support.hpp"

#include <cmath>

using namespace gnep;
using testing::random_vector;

TEST_CASE("projection onto the nonnegative orthant") {
  Vector v(2);
  v << -1, 2;
  CHECK(project_nonneg(v) == (Vector(2) << 0, 2).finished());
  Vector pos(3);
  pos << 0, 1, 5;
  CHECK(project_nonneg(pos) == pos);
  RngStream rng(1);
  Vector r = random_vector(rng, 10);
  CHECK(project_nonneg(project_nonneg(r)) == project_nonneg(r));
}

TEST_CASE("Tikhonov scalar step by hand") {
  // gradient 1 everywhere, one capacity with coefficient 1 and slack -0.5 at w = 1
  auto game = testing::scalar_game(0.0, 1.0);
  std::vector<AffineConstraint> caps{testing::affine({{0, 1.0}}, -1.5)};
  MultiplierState s{Vector::Ones(1), Vector::Ones(1)};
  tikhonov_step(game, caps, 0.1, 0.5, s, nullptr);
  CHECK(s.w[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s.lambda[0] == doctest::Approx(1 + 0.1 * (-0.5 - 0.5)).epsilon(1e-15));
}

TEST_CASE("zero multipliers at an interior point give projected SG") {
  auto spec = paper_network();
  auto cg = build_game(spec);
  const auto m = static_cast<Eigen::Index>(cg.game.dim());
  MultiplierState s{Vector::Constant(m, 0.01), Vector::Zero(7)};
  RngStream a(4), b(4);
  Vector expect = project_nonneg(s.w - 0.003 * sample_gradient(cg.game, s.w, b));
  arrow_hurwicz_step(cg.game, cg.capacities, 0.003, s, &a);
  CHECK(s.w == expect);
}

TEST_CASE("zero regularization is Arrow-Hurwicz") {
  auto cg = build_game(paper_network());
  const auto m = static_cast<Eigen::Index>(cg.game.dim());
  MultiplierState s1{Vector::Zero(m), Vector::Zero(7)}, s2 = s1;
  RngStream a(9), b(9);
  for (std::size_t i = 1; i <= 300; ++i) {
    arrow_hurwicz_step(cg.game, cg.capacities, 0.003, s1, &a, i);
    tikhonov_step(cg.game, cg.capacities, 0.003, 0.0, s2, &b, i);
  }
  CHECK(s1.w == s2.w);
  CHECK(s1.lambda == s2.lambda);
}

TEST_CASE("noise-free Arrow-Hurwicz reaches a KKT point") {
  auto cg = build_game(three_factory_example());
  MultiplierState s{Vector::Zero(5), Vector::Zero(3)};
  for (std::size_t i = 1; i <= 200000; ++i) arrow_hurwicz_step(cg.game, cg.capacities, 0.01, s, nullptr, i);
  auto r = kkt_residual(cg.game, cg.capacities, s);
  CHECK(r.violation <= 1e-4);
  CHECK(r.max() <= 1e-3);
  CHECK(s.lambda.minCoeff() >= 0.0);
}

TEST_CASE("slack capacities leave plain projected gradient") {
  auto spec = three_factory_example();
  spec.h = {1e6, 1e6, 1e6};
  auto cg = build_game(spec);
  MultiplierState s{Vector::Zero(5), Vector::Zero(3)};
  Vector plain = Vector::Zero(5);
  for (std::size_t i = 1; i <= 5000; ++i) {
    arrow_hurwicz_step(cg.game, cg.capacities, 0.01, s, nullptr, i);
    plain = project_nonneg(plain - 0.01 * block_gradient(cg.game, plain));
  }
  CHECK(s.lambda.norm() == 0.0);
  CHECK((s.w - plain).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("iterates and multipliers stay nonnegative") {
  auto cg = build_game(paper_network());
  const auto m = static_cast<Eigen::Index>(cg.game.dim());
  for (int tik = 0; tik < 2; ++tik) {
    MultiplierState s{Vector::Zero(m), Vector::Zero(7)};
    RngStream rng(tik);
    for (std::size_t i = 1; i <= 3000; ++i) {
      if (tik)
        tikhonov_step(cg.game, cg.capacities, 0.003, 0.5012, s, &rng, i);
      else
        arrow_hurwicz_step(cg.game, cg.capacities, 0.003, s, &rng, i);
      REQUIRE(s.w.minCoeff() >= 0.0);
      REQUIRE(s.lambda.minCoeff() >= 0.0);
    }
    CHECK(std::isfinite(s.w.norm()));
  }
}

TEST_CASE("seeded baselines repeat exactly") {
  auto cg = build_game(paper_network());
  const auto m = static_cast<Eigen::Index>(cg.game.dim());
  MultiplierState s1{Vector::Zero(m), Vector::Zero(7)}, s2 = s1;
  RngStream a(31), b(31);
  for (std::size_t i = 1; i <= 200; ++i) {
    tikhonov_step(cg.game, cg.capacities, 0.003, 0.5012, s1, &a, i);
    tikhonov_step(cg.game, cg.capacities, 0.003, 0.5012, s2, &b, i);
  }
  CHECK(s1.w == s2.w);
}

TEST_CASE("bad inputs") {
  auto cg = build_game(three_factory_example());
  MultiplierState s{Vector::Zero(5), Vector::Zero(2)};
  CHECK_THROWS_AS(arrow_hurwicz_step(cg.game, cg.capacities, 0.01, s, nullptr), StructuralError);
  s.lambda = Vector::Zero(3);
  CHECK_THROWS_AS(tikhonov_step(cg.game, cg.capacities, 0.01, -1.0, s, nullptr), StructuralError);
  CHECK_THROWS_AS(arrow_hurwicz_step(cg.game, cg.capacities, 0.0, s, nullptr), StructuralError);
}

TEST_CASE("divergence is reported with its iteration") {
  // anti-monotone scalar game: w doubles every step
  auto game = testing::scalar_game(-1.0, 0.0);
  MultiplierState s{Vector::Ones(1), Vector::Zero(0)};
  std::size_t at = 0;
  try {
    for (std::size_t i = 1; i <= 1000; ++i) tikhonov_step(game, {}, 1.0, 0.0, s, nullptr, i);
  } catch (const DivergenceError& e) {
    at = e.iteration();
  }
  CHECK(at == 40);
}
