#include "pasto/baselines.hpp"

#include <cmath>
#include <limits>

#include "pasto/objective.hpp"

namespace pasto {

SingleBest single_best_oracle(const MetricMatrix& mu, const Objective& obj) {
  obj.validate(mu.metrics());
  SingleBest best{0, objective_value(obj, mu.column(0))};
  for (std::size_t k = 1; k < mu.arms(); ++k) {
    const double v = objective_value(obj, mu.column(k));
    if (v > best.value) best = {k, v};
  }
  return best;
}

ProbOptimum maximize_on_simplex(const std::function<double(const Pmf&)>& value,
                                const std::function<Vector(const Pmf&)>& gradient, std::size_t arms,
                                std::size_t iters) {
  Pmf p = Pmf::uniform(arms);
  double f = value(p);
  ProbOptimum best{p, f};

  Vector g = gradient(p);
  double step = 1.0 / std::max(g.cwiseAbs().maxCoeff(), 1e-12);
  constexpr double kMinStep = 1e-300;
  constexpr double kMaxStep = 1e12;

  for (std::size_t it = 0; it < iters && step > kMinStep; ++it) {
    if (it > 0) g = gradient(p);
    const double gmax = g.maxCoeff();
    while (step > kMinStep) {
      // Floored so no coordinate underflows to a face it can never leave.
      Vector w = (p.probs().array() * (step * (g.array() - gmax)).exp()).cwiseMax(1e-300);
      const Pmf q = Pmf::from_weights(w);
      const double fq = value(q);
      if (fq >= f) {
        p = q;
        f = fq;
        step = std::min(step * 1.5, kMaxStep);
        break;
      }
      step *= 0.5;
    }
    if (f > best.value) best = {p, f};
  }
  return best;
}

ProbOptimum prob_oracle(const MetricMatrix& mu, const Objective& obj, std::size_t iters) {
  obj.validate(mu.metrics());
  if (!obj.differentiable()) {
    throw Error(ErrorCode::NonDifferentiableObjective, "prob_oracle needs a soft-penalty objective");
  }
  return maximize_on_simplex([&](const Pmf& p) { return objective_value(obj, mu.mix(p)); },
                             [&](const Pmf& p) -> Vector {
                               return mu.values().transpose() * objective_grad(obj, mu.mix(p));
                             },
                             mu.arms(), iters);
}

ProbOptimum prob_oracle_grid_k2(const MetricMatrix& mu, const Objective& obj, double step) {
  obj.validate(mu.metrics());
  if (mu.arms() != 2) throw Error(ErrorCode::DimensionMismatch, "grid oracle supports K=2 only");
  if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorCode::InvalidConfig, "grid step must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  ProbOptimum best{Pmf::one_hot(2, 1), -std::numeric_limits<double>::infinity()};
  bool first = true;
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(n);
    Vector raw(2);
    raw << a, 1.0 - a;
    const Pmf p = Pmf::from_weights(raw);
    const double v = objective_value(obj, mu.mix(p));
    if (first || v > best.value) {
      best = {p, v};
      first = false;
    }
  }
  return best;
}

Dominance dominance_check(const MetricMatrix& mu, const Objective& obj, std::size_t iters) {
  Dominance d;
  d.prob = prob_oracle(mu, obj, iters);
  d.det = single_best_oracle(mu, obj);
  d.prob_value = d.prob.value;
  d.det_value = d.det.value;
  d.gap = d.prob_value - d.det_value;
  return d;
}

namespace {

class CompositionalRule final : public detail::GradientRule {
 public:
  explicit CompositionalRule(double exponent) : exponent_(exponent) {}

  Vector gradient(std::size_t t, const MetricMatrix& uhat, const Pmf& p, const Objective& obj) override {
    const Vector sample = uhat.mix(p);
    if (t == 1 || z_.size() == 0) {
      z_ = sample;
    } else {
      const double beta = std::pow(static_cast<double>(t), -exponent_);
      z_ = (1.0 - beta) * z_ + beta * sample;
    }
    return uhat.values().transpose() * objective_grad(obj, z_);
  }

  double estimated_objective(const Pmf&, const Objective& obj) const override { return objective_value(obj, z_); }

 private:
  double exponent_;
  Vector z_;
};

}  // namespace

namespace detail {

std::unique_ptr<pasto::detail::GradientRule> make_compositional_rule(double beta_exponent) {
  if (!(beta_exponent >= 0.0 && beta_exponent <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "beta exponent must lie in [0, 1]");
  }
  return std::make_unique<CompositionalRule>(beta_exponent);
}

}  // namespace detail

RunResult sscgd_run(Environment& env, const Objective& obj, const SscgdConfig& cfg) {
  auto rule = detail::make_compositional_rule(cfg.beta_exponent);
  return pasto::detail::run_mirror_loop(env, obj, cfg.base, *rule);
}

}  // namespace pasto
