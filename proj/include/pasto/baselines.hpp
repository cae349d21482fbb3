#pragma once

#include <functional>
#include <memory>

#include "pasto/environment.hpp"
#include "pasto/pasto.hpp"
#include "pasto/types.hpp"

namespace pasto {

struct SingleBest {
  std::size_t arm = 0;
  double value = 0.0;  // may be -inf under a hard barrier
};

// Best one-hot pmf under noiseless metrics; ties go to the lowest index.
SingleBest single_best_oracle(const MetricMatrix& mu, const Objective& obj);

struct ProbOptimum {
  Pmf p = Pmf::uniform(1);
  double value = 0.0;
};

inline constexpr std::size_t kDefaultOracleIters = 20000;

// Maximizes a concave function over the simplex by exact-gradient
// exponentiated ascent with a backtracking step; returns the best iterate.
ProbOptimum maximize_on_simplex(const std::function<double(const Pmf&)>& value,
                                const std::function<Vector(const Pmf&)>& gradient, std::size_t arms,
                                std::size_t iters = kDefaultOracleIters);

// Noiseless probabilistic optimum of p -> f(mu p). Soft objectives only.
ProbOptimum prob_oracle(const MetricMatrix& mu, const Objective& obj, std::size_t iters = kDefaultOracleIters);

// K=2 only: scans p = [a, 1-a] over a grid of the given step. Works for
// hard-barrier objectives too.
ProbOptimum prob_oracle_grid_k2(const MetricMatrix& mu, const Objective& obj, double step = 1e-4);

struct Dominance {
  double prob_value = 0.0;
  double det_value = 0.0;
  double gap = 0.0;
  ProbOptimum prob;
  SingleBest det;

  bool holds(double tol = 1e-9) const { return prob_value >= det_value - tol; }
};

Dominance dominance_check(const MetricMatrix& mu, const Objective& obj, std::size_t iters = kDefaultOracleIters);

struct SscgdConfig {
  PastoConfig base;
  // beta_t = t^-exponent; 0.75 is the usual two-timescale choice.
  double beta_exponent = 0.75;
};

// Same smoothing, sampling and KL step as PASTO, but tracks the inner value
// z_t = (1 - beta_t) z_{t-1} + beta_t * Uhat_t p_t and steps along
// Uhat_t^T grad f(z_t).
RunResult sscgd_run(Environment& env, const Objective& obj, const SscgdConfig& cfg);

namespace detail {
// z_t tracking with g_t = Uhat_t^T grad f(z_t); z_1 = Uhat_1 p_1.
std::unique_ptr<pasto::detail::GradientRule> make_compositional_rule(double beta_exponent);
}  // namespace detail

}  // namespace pasto
