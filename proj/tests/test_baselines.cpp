#include <doctest.h>

#include <functional>
#include <limits>
#include <random>

#include "pasto/baselines.hpp"
#include "pasto/objective.hpp"
#include "test_util.hpp"

using namespace pasto;

namespace {

// Exhaustive grid over the simplex in steps of 1/n.
double simplex_grid_max(const MetricMatrix& mu, const Objective& obj, int n) {
  const auto k = static_cast<Eigen::Index>(mu.arms());
  double best = -std::numeric_limits<double>::infinity();
  Vector counts = Vector::Zero(k);
  std::function<void(Eigen::Index, int)> rec = [&](Eigen::Index i, int left) {
    if (i == k - 1) {
      counts[i] = left;
      best = std::max(best, objective_value(obj, mu.values() * (counts / n)));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, n);
  return best;
}

Objective hard_setting_a() {
  Objective obj;
  obj.guardrails = {{1, 0.0, 0.0, GuardrailKind::HardBarrier}};
  return obj;
}

}  // namespace

TEST_CASE("single best oracle") {
  const auto mu = MetricMatrix::from_rows({{2, 0}, {-2, 2}});
  auto best = single_best_oracle(mu, hard_setting_a());
  CHECK(best.arm == 1);
  CHECK(best.value == 0.0);

  best = single_best_oracle(MetricMatrix::from_rows({{1, 3, 2}}), Objective{});
  CHECK(best.arm == 1);
  CHECK(best.value == 3.0);

  best = single_best_oracle(MetricMatrix::from_rows({{4}, {1}}), hard_setting_a());
  CHECK(best.arm == 0);
  CHECK(best.value == 4.0);

  // Ties go to the lowest index.
  CHECK(single_best_oracle(MetricMatrix::from_rows({{1, 3, 3}}), Objective{}).arm == 1);

  std::mt19937_64 rng(50);
  for (int i = 0; i < 50; ++i) {
    const MetricMatrix m(testing::random_matrix(rng, 3, 6, -1, 1));
    const auto obj = testing::random_soft_objective(rng, 3);
    double manual = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 6; ++k) manual = std::max(manual, objective_value(obj, m.mix(Pmf::one_hot(6, k))));
    CHECK(single_best_oracle(m, obj).value == manual);
  }
}

TEST_CASE("grid oracle on setting A") {
  const auto mu = MetricMatrix::from_rows({{2, 0}, {-2, 2}});
  // Hard barrier: the best mix sits exactly on y = 0.
  const auto hard = prob_oracle_grid_k2(mu, hard_setting_a());
  CHECK(hard.value == doctest::Approx(1.0));
  CHECK(hard.p[0] == doctest::Approx(0.5));

  // Soft, lambda = 5: f(a) = 2a - 5 (4a - 2)^2 for a > 1/2, maximal at a = 0.5125.
  const auto soft = prob_oracle_grid_k2(mu, testing::setting_a_soft());
  CHECK(soft.value == doctest::Approx(1.0125).epsilon(1e-12));
  CHECK(soft.p[0] == doctest::Approx(0.5125).epsilon(1e-12));
}

TEST_CASE("prob oracle on setting A") {
  const auto mu = MetricMatrix::from_rows({{2, 0}, {-2, 2}});
  const auto soft = prob_oracle(mu, testing::setting_a_soft());
  const auto grid = prob_oracle_grid_k2(mu, testing::setting_a_soft());
  CHECK(soft.value == doctest::Approx(grid.value).epsilon(1e-9));
  CHECK(soft.p[0] == doctest::Approx(0.5125).epsilon(1e-6));

  // As lambda grows the soft optimum approaches the hard-barrier mix.
  double prev_gap = 1.0;
  for (double lambda : {5.0, 50.0, 500.0, 5000.0}) {
    Objective obj;
    obj.guardrails = {{1, 0.0, lambda, GuardrailKind::SoftSquare}};
    const auto r = prob_oracle(mu, obj);
    const double gap = std::abs(r.value - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-3);

  CHECK_THROWS_AS(prob_oracle(mu, hard_setting_a()), Error);
}

TEST_CASE("prob oracle on a linear objective picks the best vertex") {
  const auto mu = MetricMatrix::from_rows({{0.3, 0.9, -0.2, 0.5}});
  const auto r = prob_oracle(mu, Objective{});
  CHECK(r.value == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(r.p[1] > 1.0 - 1e-9);
  const auto d = dominance_check(mu, Objective{});
  CHECK(std::abs(d.gap) <= 1e-6);
}

TEST_CASE("prob oracle matches a dense simplex grid") {
  std::mt19937_64 rng(51);
  for (int inst = 0; inst < 3; ++inst) {
    const MetricMatrix mu(testing::random_matrix(rng, 3, 5, -1, 1));
    const auto obj = testing::random_soft_objective(rng, 3);
    const double grid = simplex_grid_max(mu, obj, 100);
    const double oracle = prob_oracle(mu, obj).value;
    CHECK(oracle >= grid - 1e-9);
    CHECK(std::abs(oracle - grid) <= 1e-3);
  }
}

TEST_CASE("dominance on setting A and random instances") {
  const auto mu = MetricMatrix::from_rows({{2, 0}, {-2, 2}});
  const auto d = dominance_check(mu, testing::setting_a_soft());
  CHECK(d.det_value == 0.0);
  CHECK(d.gap > 0.5);
  CHECK(d.holds());

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = setting_b(10, seed, 0.0);
    CHECK(dominance_check(s.mu, s.objective).gap >= -1e-9);
  }
}

TEST_CASE("prob oracle scales with the primary row on unconstrained instances") {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 20; ++i) {
    Matrix m = testing::random_matrix(rng, 2, 4, -1, 1);
    const double base = prob_oracle(MetricMatrix(m), Objective{}).value;
    m.row(0) *= 3.5;
    CHECK(prob_oracle(MetricMatrix(m), Objective{}).value == doctest::Approx(3.5 * base).epsilon(1e-9));
  }
}

TEST_CASE("S-SCGD collapses to the PASTO gradient when fed the truth") {
  const auto mu = MetricMatrix::from_rows({{2, 0, 1}, {-2, 2, 0.5}});
  const auto obj = testing::setting_a_soft();
  auto pasto_rule = pasto::detail::make_history_average_rule(VhatState::empty(2, 3));
  auto sscgd_rule = detail::make_compositional_rule(0.0);  // beta_t = 1
  std::mt19937_64 rng(53);
  for (std::size_t t = 1; t <= 20; ++t) {
    const auto p = testing::random_pmf(rng, 3);
    const Vector a = pasto_rule->gradient(t, mu, p, obj);
    const Vector b = sscgd_rule->gradient(t, mu, p, obj);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(sscgd_rule->estimated_objective(p, obj) == doctest::Approx(objective_value(obj, mu.mix(p))));
  }
}

TEST_CASE("S-SCGD initializes z from the first sample") {
  const auto obj = testing::setting_a_soft();
  auto rule = detail::make_compositional_rule(0.75);
  const auto u1 = MetricMatrix::from_rows({{4, 0}, {-4, 0}});
  const auto p1 = make_pmf({1, 1});
  (void)rule->gradient(1, u1, p1, obj);
  CHECK(rule->estimated_objective(p1, obj) == doctest::Approx(objective_value(obj, u1.mix(p1))));
  CHECK_THROWS_AS(detail::make_compositional_rule(1.5), Error);
}

TEST_CASE("sscgd_run keeps the simplex floor") {
  const auto s = setting_a();
  SimulatedEnvironment env(s.mu, s.sigma, 3);
  SscgdConfig cfg;
  cfg.base.horizon = 1000;
  cfg.base.gamma = 0.05;
  cfg.base.rng_seed = 4;
  const auto run = sscgd_run(env, s.objective, cfg);
  for (const auto& r : run.trajectory.records) CHECK(r.p.min() >= r.epsilon / 2 - 1e-12);
}
