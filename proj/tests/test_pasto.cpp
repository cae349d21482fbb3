#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "pasto/environment.hpp"
#include "pasto/objective.hpp"
#include "pasto/pasto.hpp"
#include "test_util.hpp"

using namespace pasto;

namespace {

Scenario noise_free_linear() {
  Scenario s;
  s.mu = MetricMatrix::from_rows({{1.0, 0.0, 0.0}});
  s.sigma = 0.0;
  return s;
}

PastoConfig setting_a_config(std::uint64_t seed, std::size_t horizon) {
  PastoConfig cfg;
  cfg.horizon = horizon;
  cfg.gamma = 0.05;
  cfg.epsilon = PaperSim{0.1, 10.0};
  cfg.rng_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("smooth_pmf") {
  auto p = smooth_pmf(WeightVector::ones(4), 0.2);
  for (std::size_t k = 0; k < 4; ++k) CHECK(p[k] == doctest::Approx(0.25));

  Vector w(2);
  w << 3.0, 1.0;
  p = smooth_pmf(WeightVector(w), 0.5);
  CHECK(p[0] == doctest::Approx(0.625));
  CHECK(p[1] == doctest::Approx(0.375));

  Vector skew(3);
  skew << 100.0, 1e-6, 3.0;
  p = smooth_pmf(WeightVector(skew), 1.0);
  for (std::size_t k = 0; k < 3; ++k) CHECK(p[k] == doctest::Approx(1.0 / 3));

  std::mt19937_64 rng(30);
  for (int i = 0; i < 100; ++i) {
    const double eps = 0.01 + 0.5 * (i % 10) / 10.0;
    const auto q = smooth_pmf(WeightVector(testing::random_vector(rng, 6, 1e-9, 1e3)), eps);
    CHECK(q.min() >= eps / 6 - 1e-15);
  }

  CHECK_THROWS_AS(smooth_pmf(WeightVector::ones(2), 0.0), Error);
  CHECK_THROWS_AS(smooth_pmf(WeightVector::ones(2), 1.5), Error);
}

TEST_CASE("kl_proximal_step closed form") {
  const auto same = kl_proximal_step(WeightVector::ones(3), Vector::Zero(3), 0.3);
  CHECK((same.pmf().probs() - Pmf::uniform(3).probs()).cwiseAbs().maxCoeff() < 1e-15);

  const double gamma = 0.2;
  Vector g(2);
  g << std::log(2.0) / gamma, 0.0;
  const auto p = kl_proximal_step(WeightVector::ones(2), g, gamma).pmf();
  CHECK(p[0] == doctest::Approx(2.0 / 3));
  CHECK(p[1] == doctest::Approx(1.0 / 3));

  Vector bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(kl_proximal_step(WeightVector::ones(2), bad, 0.1), Error);
}

TEST_CASE("kl_proximal_step matches the numerical proximal minimizer") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dim(2, 5);
  std::uniform_real_distribution<double> gam(0.05, 1.0);
  for (int i = 0; i < 30; ++i) {
    const Eigen::Index k = dim(rng);
    const Vector w = testing::random_vector(rng, k, 0.2, 5.0);
    const double gamma = gam(rng);
    const Vector g = testing::random_vector(rng, k, -1.5, 1.5) / gamma;
    const Vector closed = kl_proximal_step(WeightVector(w), g, gamma).pmf().probs();
    const Vector numeric = testing::kl_prox_oracle(w / w.sum(), g, gamma);
    CHECK((closed - numeric).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("rescaling the weights never changes the pmf") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 50; ++i) {
    const Vector w = testing::random_vector(rng, 4, 0.1, 10.0);
    const Vector g = testing::random_vector(rng, 4, -20.0, 20.0);
    const auto a = kl_proximal_step(WeightVector(w), g, 0.5, true).pmf();
    const auto b = kl_proximal_step(WeightVector(w), g, 0.5, false).pmf();
    CHECK((a.probs() - b.probs()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  // Huge steps stay finite with rescaling.
  Vector g(2);
  g << 1e6, -1e6;
  const auto w = kl_proximal_step(WeightVector::ones(2), g, 1.0);
  CHECK(w.weights().allFinite());
  CHECK(w.pmf()[0] == doctest::Approx(1.0));
}

TEST_CASE("pasto_run with T=1 returns the smoothed uniform pmf") {
  const auto s = setting_a();
  SimulatedEnvironment env(s.mu, s.sigma, 1);
  const auto run = pasto_run(env, s.objective, setting_a_config(2, 1));
  REQUIRE(run.trajectory.records.size() == 1);
  CHECK(run.p_bar[0] == doctest::Approx(0.5));
  CHECK((run.p_bar.probs() - run.trajectory.records[0].p.probs()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pasto_run invariants on setting A") {
  const auto s = setting_a();
  SimulatedEnvironment env(s.mu, s.sigma, 5);
  const auto cfg = setting_a_config(6, 2000);
  const auto run = pasto_run(env, s.objective, cfg);
  const auto& recs = run.trajectory.records;
  REQUIRE(recs.size() == cfg.horizon);

  Vector sum = Vector::Zero(2);
  for (const auto& r : recs) {
    CHECK(r.p.min() >= r.epsilon / 2 - 1e-12);
    CHECK(r.epsilon == epsilon_at(cfg.epsilon, r.t));
    CHECK(r.observations.size() == 1);
    CHECK(r.observations[0].sample_prob == r.p[r.observations[0].arm]);
    CHECK(r.true_objective.has_value());
    sum += r.p.probs();
  }
  CHECK((run.p_bar.probs() - sum / static_cast<double>(recs.size())).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(run.trajectory.p_bar.probs() == run.p_bar.probs());
}

TEST_CASE("pasto_run is deterministic under seed") {
  const auto s = setting_a();
  auto once = [&] {
    SimulatedEnvironment env(s.mu, s.sigma, 42);
    return pasto_run(env, s.objective, setting_a_config(43, 500));
  };
  const auto a = once();
  const auto b = once();
  for (std::size_t i = 0; i < a.trajectory.records.size(); ++i) {
    CHECK(a.trajectory.records[i].p.probs() == b.trajectory.records[i].p.probs());
    CHECK(a.trajectory.records[i].gradient == b.trajectory.records[i].gradient);
    CHECK(a.trajectory.records[i].observations[0].arm == b.trajectory.records[i].observations[0].arm);
  }
  CHECK(a.p_bar.probs() == b.p_bar.probs());
}

TEST_CASE("weight rescaling leaves the pmf trajectory unchanged") {
  const auto s = setting_a(0.5);
  auto run_with = [&](bool rescale) {
    SimulatedEnvironment env(s.mu, s.sigma, 7);
    auto cfg = setting_a_config(8, 300);
    cfg.rescale_weights = rescale;
    return pasto_run(env, s.objective, cfg);
  };
  const auto a = run_with(true);
  const auto b = run_with(false);
  for (std::size_t i = 0; i < a.trajectory.records.size(); ++i) {
    CHECK((a.trajectory.records[i].p.probs() - b.trajectory.records[i].p.probs()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("pasto_run concentrates on the best arm of a noise-free linear reward") {
  const auto s = noise_free_linear();
  SimulatedEnvironment env(s.mu, 0.0, 1);
  PastoConfig cfg;
  cfg.horizon = 2000;
  cfg.gamma = 0.1 / 3;
  cfg.rng_seed = 9;
  const auto run = pasto_run(env, Objective{}, cfg);
  // Longer-run reference: the floor eps_t/K is the only mass left elsewhere.
  CHECK(run.p_bar[0] >= 0.9);
  cfg.horizon = 20000;
  SimulatedEnvironment env_long(s.mu, 0.0, 1);
  CHECK(pasto_run(env_long, Objective{}, cfg).p_bar[0] > run.p_bar[0]);
}

TEST_CASE("pasto_run converges near the setting A optimum") {
  const auto s = setting_a();
  SimulatedEnvironment env(s.mu, s.sigma, 2024);
  const auto run = pasto_run(env, s.objective, setting_a_config(2025, 5000));
  const double f = objective_value(s.objective, s.mu.mix(run.p_bar));
  // The soft optimum is 1.0125 at p = [0.5125, 0.4875].
  CHECK(f >= 0.8);
  CHECK(f <= 1.0125 + 1e-12);
}

TEST_CASE("exact-gradient steps are monotone for small gamma") {
  // eps = 0, cap = inf, noise-free: V-hat is mu and each iteration is an
  // exponentiated gradient step on f(mu p).
  std::mt19937_64 rng(33);
  for (int inst = 0; inst < 20; ++inst) {
    const MetricMatrix mu(testing::random_matrix(rng, 3, 5, -1.0, 1.0));
    const auto obj = testing::random_soft_objective(rng, 3);
    WeightVector w = WeightVector::ones(5);
    double prev = objective_value(obj, mu.mix(w.pmf()));
    for (int t = 0; t < 2000; ++t) {
      const Pmf p = w.pmf();
      w = kl_proximal_step(w, pasto_gradient(mu, p, obj), 0.01);
      const double f = objective_value(obj, mu.mix(w.pmf()));
      CHECK(f >= prev - 1e-9);
      prev = f;
    }
  }
}

TEST_CASE("parallel queries record Q observations per iteration") {
  const auto s = setting_b(8, 3, 0.3);
  SimulatedEnvironment env(s.mu, s.sigma, 4);
  PastoConfig cfg;
  cfg.horizon = 50;
  cfg.gamma = 0.1 / 8;
  cfg.parallel_q = 5;
  const auto run = pasto_run(env, s.objective, cfg);
  for (const auto& r : run.trajectory.records) {
    CHECK(r.observations.size() == 5);
    for (const auto& o : r.observations) CHECK(o.sample_prob == r.p[o.arm]);
  }
}

TEST_CASE("a dominant prior pins V-hat") {
  const auto s = setting_a();
  SimulatedEnvironment env(s.mu, 0.0, 1);
  auto cfg = setting_a_config(3, 20);
  cfg.prior = s.mu;
  cfg.prior_weight = 1e12;
  const auto run = pasto_run(env, s.objective, cfg);
  for (const auto& r : run.trajectory.records) {
    const Vector exact = pasto_gradient(s.mu, r.p, s.objective);
    CHECK((r.gradient - exact).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("overflow guard warns once") {
  const auto s = setting_a();
  SimulatedEnvironment env(s.mu, s.sigma, 1);
  auto cfg = setting_a_config(2, 50);
  cfg.gamma = 50.0;
  const auto run = pasto_run(env, s.objective, cfg);
  CHECK(run.trajectory.warnings.size() == 1);
  for (const auto& r : run.trajectory.records) CHECK(r.p.probs().allFinite());
}

TEST_CASE("pasto_run rejects hard barriers and bad configs") {
  const auto s = setting_a();
  SimulatedEnvironment env(s.mu, s.sigma, 1);
  Objective hard;
  hard.guardrails = {{1, 0.0, 0.0, GuardrailKind::HardBarrier}};
  CHECK_THROWS_AS(pasto_run(env, hard, setting_a_config(1, 10)), Error);
  auto cfg = setting_a_config(1, 10);
  cfg.parallel_q = 3;
  CHECK_THROWS_AS(pasto_run(env, s.objective, cfg), Error);
}

namespace {

class FailingEnvironment final : public Environment {
 public:
  std::size_t arms() const override { return 2; }
  std::size_t metrics() const override { return 1; }
  Vector query(std::size_t, std::size_t t) override {
    if (t > 3) throw std::runtime_error("backend down");
    return Vector::Ones(1);
  }
  std::optional<MetricMatrix> ground_truth(std::size_t) const override { return std::nullopt; }
};

}  // namespace

TEST_CASE("environment failures propagate") {
  FailingEnvironment env;
  PastoConfig cfg;
  cfg.horizon = 10;
  try {
    (void)pasto_run(env, Objective{}, cfg);
    FAIL("expected EnvironmentFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EnvironmentFailure);
  }
}
