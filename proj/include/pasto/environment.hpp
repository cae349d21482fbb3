#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include "pasto/types.hpp"

namespace pasto {

// Anything that can answer "apply arm k at iteration t, what metrics did
// you see?". Simulated environments also expose their ground truth.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t arms() const = 0;
  virtual std::size_t metrics() const = 0;
  // One noisy metric vector for `arm` at iteration t (1-based).
  virtual Vector query(std::size_t arm, std::size_t t) = 0;
  // Expected metrics at iteration t, when known.
  virtual std::optional<MetricMatrix> ground_truth(std::size_t t) const = 0;
};

// mu_t = mu + amplitude * sin(2 pi t / period) on one metric row.
struct Drift {
  double amplitude = 0.0;
  double period = 1.0;
  std::size_t row = 0;
};

// Ground truth plus i.i.d. N(0, sigma^2) noise on every metric of every query.
class SimulatedEnvironment final : public Environment {
 public:
  SimulatedEnvironment(MetricMatrix mu, double sigma, std::uint64_t seed,
                       std::optional<Drift> drift = std::nullopt);

  std::size_t arms() const override { return mu_.arms(); }
  std::size_t metrics() const override { return mu_.metrics(); }
  Vector query(std::size_t arm, std::size_t t) override;
  std::optional<MetricMatrix> ground_truth(std::size_t t) const override;

  const MetricMatrix& base_mean() const { return mu_; }
  double sigma() const { return sigma_; }
  const std::optional<Drift>& drift() const { return drift_; }

 private:
  MetricMatrix mu_;
  double sigma_;
  std::optional<Drift> drift_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct Scenario {
  MetricMatrix mu = MetricMatrix::zeros(1, 1);
  double sigma = 0.0;
  Objective objective;
  std::size_t default_q = 1;
};

constexpr double kSettingANoiseVariance = 5.0;

// K=2, mu^X = [2, 0], mu^Y = [-2, 2], soft guardrail c=0 with lambda=5.
Scenario setting_a(double noise_variance = kSettingANoiseVariance);

// M=3 metrics (x, y1, y2), entries i.i.d. Uniform[-1, 1], both guardrails
// soft at c=0.5 with lambda=5. Q defaults to 10.
Scenario setting_b(std::size_t arms, std::uint64_t seed, double sigma);

// Signed (f_now - f_single) / (f_prob_opt - f_single). Throws DegenerateGap
// when the oracle gap is at most 1e-9.
double relative_gain(double f_now, double f_single, double f_prob_opt);

}  // namespace pasto
