#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "rigsolve/evaluation.hpp"
#include "test_util.hpp"

using namespace rigsolve;
using namespace rigsolve::testutil;

TEST_CASE("rmse hand case: single vertex off by (3,0,4)") {
  BlendshapeModel m;
  m.n = 1;
  m.m = 1;
  m.neutral = {0, 0, 0};
  m.basis = {3, 0, 4};
  // f(1) = (3,0,4), target = 0 -> sqrt(25/1) = 5
  CHECK(rmse(m, std::vector<double>{1.0}, std::vector<double>{0, 0, 0}) ==
        doctest::Approx(5.0));
  CHECK(rmse(m, std::vector<double>{0.0}, std::vector<double>{0, 0, 0}) == 0.0);
}

TEST_CASE("rmse divides by the vertex count, not the coordinate count") {
  // two vertices, each displaced by distance 5 -> rmse stays 5
  BlendshapeModel m;
  m.n = 2;
  m.m = 1;
  m.neutral = {0, 0, 0, 0, 0, 0};
  m.basis = {3, 0, 4, 0, 3, 4};
  CHECK(rmse(m, std::vector<double>{1.0}, std::vector<double>(6, 0.0)) ==
        doctest::Approx(5.0));
}

TEST_CASE("rmse against pure noise concentrates near sqrt(3) sigma") {
  // E||v - (v+eps)||^2 = 3 sigma^2 per vertex
  std::mt19937_64 rng(71);
  const double sigma = 0.1;
  std::normal_distribution<double> noise(0.0, sigma);
  BlendshapeModel m;
  m.n = 4000;
  m.m = 1;
  m.neutral.assign(3 * m.n, 0.0);
  m.basis.assign(3 * m.n, 0.0);
  std::vector<double> target(3 * m.n);
  for (auto& v : target) v = noise(rng);
  const double r = rmse(m, std::vector<double>{0.0}, target);
  CHECK(r == doctest::Approx(std::sqrt(3.0) * sigma).epsilon(0.05));
}

TEST_CASE("rmse is invariant to permuting vertices consistently") {
  std::mt19937_64 rng(73);
  const auto model = random_model(rng, 6, 4, 2, 0);
  const auto w = random_weights(rng, model.m);
  std::vector<double> target(model.dim());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : target) v = u(rng);

  std::vector<int> perm(model.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  auto permuted = model;
  std::vector<double> ptarget(target.size());
  for (int l = 0; l < model.n; ++l) {
    for (int c = 0; c < 3; ++c) {
      permuted.neutral[3 * l + c] = model.neutral[3 * perm[l] + c];
      ptarget[3 * l + c] = target[3 * perm[l] + c];
    }
    for (int i = 0; i < model.m; ++i)
      for (int c = 0; c < 3; ++c)
        permuted.column(i)[3 * l + c] = model.column(i)[3 * perm[l] + c];
  }
  for (auto& t : permuted.correctives)
    for (int l = 0; l < model.n; ++l)
      for (int c = 0; c < 3; ++c)
        t.offset[3 * l + c] = model.correctives[&t - permuted.correctives.data()]
                                  .offset[3 * perm[l] + c];
  CHECK(rmse(model, w, target) == doctest::Approx(rmse(permuted, w, ptarget)));
}

TEST_CASE("cardinality") {
  const std::vector<double> w{0.0, 1e-7, 1e-5, 0.5, 1.0};
  SUBCASE("hand case at the default threshold") {
    CHECK(cardinality(w, 1e-6) == 3);
  }
  SUBCASE("monotone in the threshold") {
    int prev = static_cast<int>(w.size());
    for (double thr : {0.0, 1e-8, 1e-6, 1e-4, 0.6, 2.0}) {
      const int c = cardinality(w, thr);
      CHECK(c <= prev);
      prev = c;
    }
    CHECK(prev == 0);
  }
  SUBCASE("empty vector has cardinality 0") {
    CHECK(cardinality(std::vector<double>{}, 1e-6) == 0);
  }
}

TEST_CASE("roughness") {
  SUBCASE("constant and linear curves are perfectly smooth") {
    CHECK(roughness(std::vector<double>{0.4, 0.4, 0.4, 0.4}) == 0.0);
    CHECK(roughness(std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}) ==
          doctest::Approx(0.0));
  }
  SUBCASE("hand case: (0,1,0) has one second difference of -2") {
    CHECK(roughness(std::vector<double>{0, 1, 0}) == doctest::Approx(4.0));
  }
  SUBCASE("fewer than 3 frames is an error") {
    CHECK_THROWS_AS(roughness(std::vector<double>{0, 1}), ValidationError);
  }
  SUBCASE("invariant to time reversal and constant shift") {
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> curve(12);
    for (auto& v : curve) v = u(rng);
    auto reversed = curve;
    std::reverse(reversed.begin(), reversed.end());
    auto shifted = curve;
    for (auto& v : shifted) v += 0.3;
    CHECK(roughness(curve) == doctest::Approx(roughness(reversed)));
    CHECK(roughness(curve) == doctest::Approx(roughness(shifted)));
  }
}

TEST_CASE("sequence_metrics aggregates per-frame values") {
  std::mt19937_64 rng(83);
  const auto model = random_model(rng, 5, 3, 0, 0);
  const std::vector<std::vector<double>> w_rows{
      {0.2, 0.0, 0.0}, {0.4, 0.0, 0.0}, {0.2, 0.0, 0.0}};
  Matrix weights(3, 3);
  std::vector<std::vector<double>> targets;
  for (int t = 0; t < 3; ++t) {
    for (int j = 0; j < 3; ++j) weights(t, j) = w_rows[t][j];
    targets.push_back(evaluate_rig(model, w_rows[t]));
  }
  const auto m = sequence_metrics(model, weights, targets, 1e-6);
  REQUIRE(m.frames.size() == 3);
  CHECK(m.mean_rmse == doctest::Approx(0.0));
  CHECK(m.max_rmse == doctest::Approx(0.0));
  CHECK(m.mean_cardinality == doctest::Approx(1.0));
  REQUIRE(m.roughness_per_controller.size() == 3);
  // controller 0 curve (0.2, 0.4, 0.2): second difference -0.4
  CHECK(m.roughness_per_controller[0] == doctest::Approx(0.16));
  CHECK(m.total_roughness == doctest::Approx(0.16));

  // two frames: roughness fields stay empty
  Matrix w2(2, 3);
  for (int t = 0; t < 2; ++t)
    for (int j = 0; j < 3; ++j) w2(t, j) = w_rows[t][j];
  const auto m2 = sequence_metrics(model, w2, {targets[0], targets[1]}, 1e-6);
  CHECK(m2.roughness_per_controller.empty());
  CHECK(m2.total_roughness == 0.0);
}

TEST_CASE("tradeoff_table") {
  std::mt19937_64 rng(89);
  const auto model = random_model(rng, 8, 5, 0, 0);
  std::vector<std::vector<double>> targets;
  for (int t = 0; t < 6; ++t) {
    auto w = random_weights(rng, model.m);
    w[3] = 0.0;
    w[4] = 0.0;
    targets.push_back(evaluate_rig(model, w));
  }
  SolverConfig cfg;

  SUBCASE("one row per grid alpha, rmse grows and cardinality shrinks") {
    const std::vector<double> grid{0.0, 0.5, 50.0};
    const auto table =
        tradeoff_table(model, nullptr, targets, SolveMethod::Holistic, grid, cfg);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].alpha == 0.0);
    CHECK(table.rows[2].mean_cardinality == doctest::Approx(0.0));
    CHECK(table.rows[0].mean_cardinality >= table.rows[1].mean_cardinality);
    CHECK(table.rows[0].mean_rmse <= table.rows[2].mean_rmse + 1e-12);
    CHECK_FALSE(table.alpha_star.has_value());
  }
  SUBCASE("alpha_star picks the smallest alpha inside the band") {
    const std::vector<double> grid{0.0, 0.5, 50.0};
    const auto table = tradeoff_table(model, nullptr, targets, SolveMethod::Holistic,
                                      grid, cfg, std::make_pair(0.0, 0.5));
    REQUIRE(table.alpha_star.has_value());
    CHECK(*table.alpha_star == 50.0);
    const auto loose = tradeoff_table(model, nullptr, targets, SolveMethod::Holistic,
                                      grid, cfg, std::make_pair(0.0, 100.0));
    REQUIRE(loose.alpha_star.has_value());
    CHECK(*loose.alpha_star == 0.0);
  }
  SUBCASE("deterministic across calls") {
    const std::vector<double> grid{0.1};
    const auto a =
        tradeoff_table(model, nullptr, targets, SolveMethod::Holistic, grid, cfg);
    const auto b =
        tradeoff_table(model, nullptr, targets, SolveMethod::Holistic, grid, cfg);
    CHECK(a.rows[0].mean_rmse == b.rows[0].mean_rmse);
    CHECK(a.rows[0].mean_cardinality == b.rows[0].mean_cardinality);
  }
  SUBCASE("empty alpha grid is rejected") {
    CHECK_THROWS_AS(
        tradeoff_table(model, nullptr, targets, SolveMethod::Holistic, {}, cfg),
        ValidationError);
  }
}
