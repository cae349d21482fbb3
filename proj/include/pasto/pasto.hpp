#pragma once

#include <memory>

#include "pasto/environment.hpp"
#include "pasto/estimator.hpp"
#include "pasto/types.hpp"

namespace pasto {

// (1 - eps) * w / |w|_1 + eps / K. Throws InvalidEpsilon unless eps in (0, 1].
Pmf smooth_pmf(const WeightVector& w, double eps);

// Multiplicative update w_k * exp(gamma * g_k), the closed-form KL proximal
// step. With `rescale` the result is divided by its max entry, which leaves
// the induced pmf unchanged.
WeightVector kl_proximal_step(const WeightVector& w, const Vector& g, double gamma, bool rescale = true);

struct RunResult {
  Pmf p_bar;
  Trajectory trajectory;
};

// Full PASTO loop for cfg.horizon iterations. Deterministic given
// cfg.rng_seed and the environment's own seed.
RunResult pasto_run(Environment& env, const Objective& obj, const PastoConfig& cfg);

namespace detail {

// The part of the loop that turns this iteration's estimate into a gradient.
class GradientRule {
 public:
  virtual ~GradientRule() = default;
  virtual Vector gradient(std::size_t t, const MetricMatrix& uhat, const Pmf& p, const Objective& obj) = 0;
  // Objective under the rule's own estimate of the metrics at p.
  virtual double estimated_objective(const Pmf& p, const Objective& obj) const = 0;
};

// History average V-hat_t with g_t = V-hat_t^T grad f(V-hat_t p_t).
std::unique_ptr<GradientRule> make_history_average_rule(VhatState initial);

// Smoothed sampling, querying, capped estimation and KL steps shared by
// PASTO and S-SCGD.
RunResult run_mirror_loop(Environment& env, const Objective& obj, const PastoConfig& cfg, GradientRule& rule);

}  // namespace detail
}  // namespace pasto
