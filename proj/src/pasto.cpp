#include "pasto/pasto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pasto/objective.hpp"

namespace pasto {

Pmf smooth_pmf(const WeightVector& w, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidEpsilon, "epsilon must lie in (0, 1]");
  const Vector& raw = w.weights();
  const double k = static_cast<double>(raw.size());
  return Pmf::from_weights((1.0 - eps) * raw / raw.sum() + Vector::Constant(raw.size(), eps / k));
}

WeightVector kl_proximal_step(const WeightVector& w, const Vector& g, double gamma, bool rescale) {
  if (g.size() != w.weights().size()) throw Error(ErrorCode::DimensionMismatch, "gradient length differs from K");
  if (!g.allFinite()) throw Error(ErrorCode::NonFiniteGradient, "gradient has a non-finite entry");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidConfig, "gamma must be positive");
  if (!rescale) return WeightVector(w.weights().array() * (gamma * g.array()).exp());
  // log w + gamma g, shifted so the largest weight is exactly 1.
  Vector log_w = w.weights().array().log() + gamma * g.array();
  log_w.array() -= log_w.maxCoeff();
  // Entries this far below the max are already zero mass in double precision.
  Vector next = log_w.array().exp().cwiseMax(std::numeric_limits<double>::min());
  return WeightVector(std::move(next));
}

namespace detail {

RunResult run_mirror_loop(Environment& env, const Objective& obj, const PastoConfig& cfg, GradientRule& rule) {
  const std::size_t arms = env.arms();
  const std::size_t metrics = env.metrics();
  obj.validate(metrics);
  if (!obj.differentiable()) {
    throw Error(ErrorCode::NonDifferentiableObjective, "optimization needs a soft-penalty objective");
  }
  cfg.validate(arms, metrics);

  std::mt19937_64 rng(cfg.rng_seed);
  WeightVector w = WeightVector::ones(arms);
  Vector p_sum = Vector::Zero(static_cast<Eigen::Index>(arms));
  double max_abs_metric = 0.0;
  bool overflow_warned = false;

  Trajectory traj;
  traj.records.reserve(cfg.horizon);

  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    IterationRecord rec;
    rec.t = t;
    rec.epsilon = epsilon_at(cfg.epsilon, t);
    rec.p = smooth_pmf(w, rec.epsilon);
    const Pmf& p = rec.p;

    std::discrete_distribution<std::size_t> draw(p.probs().data(), p.probs().data() + p.probs().size());
    rec.observations.reserve(cfg.parallel_q);
    for (std::size_t q = 0; q < cfg.parallel_q; ++q) {
      Observation obs;
      obs.arm = draw(rng);
      try {
        obs.metrics = env.query(obs.arm, t);
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw Error(ErrorCode::EnvironmentFailure, e.what());
      }
      if (static_cast<std::size_t>(obs.metrics.size()) != metrics || !obs.metrics.allFinite()) {
        throw Error(ErrorCode::EnvironmentFailure, "environment returned a malformed observation");
      }
      obs.sample_prob = p[obs.arm];
      max_abs_metric = std::max(max_abs_metric, obs.metrics.cwiseAbs().maxCoeff());
      rec.observations.push_back(std::move(obs));
    }

    const double cap = std::visit(
        [&](const auto& c) -> double {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, CapAuto>) {
            return max_abs_metric * static_cast<double>(arms) / rec.epsilon;
          } else if constexpr (std::is_same_v<C, CapNone>) {
            return std::numeric_limits<double>::infinity();
          } else {
            return c.value;
          }
        },
        cfg.cap);

    Matrix uhat_sum = Matrix::Zero(static_cast<Eigen::Index>(metrics), static_cast<Eigen::Index>(arms));
    for (const auto& obs : rec.observations) uhat_sum += build_uhat(obs, arms, metrics, cap).values();
    const MetricMatrix uhat(uhat_sum / static_cast<double>(rec.observations.size()));

    rec.gradient = rule.gradient(t, uhat, p, obj);
    rec.vhat_objective = rule.estimated_objective(p, obj);
    if (auto mu = env.ground_truth(t)) rec.true_objective = objective_value(obj, mu->mix(p));

    if (!overflow_warned && cfg.gamma * rec.gradient.cwiseAbs().maxCoeff() > 30.0) {
      std::ostringstream msg;
      msg << "gamma * |g| exceeded 30 at t=" << t << "; consider a smaller gamma or a tighter cap";
      traj.warnings.push_back(msg.str());
      overflow_warned = true;
    }
    w = kl_proximal_step(w, rec.gradient, cfg.gamma, cfg.rescale_weights);

    p_sum += p.probs();
    traj.records.push_back(std::move(rec));
  }

  traj.p_bar = Pmf::from_weights(p_sum / static_cast<double>(cfg.horizon));
  return {traj.p_bar, std::move(traj)};
}

}  // namespace detail

namespace detail {
namespace {

class HistoryAverageRule final : public GradientRule {
 public:
  explicit HistoryAverageRule(VhatState state) : state_(std::move(state)) {}

  Vector gradient(std::size_t, const MetricMatrix& uhat, const Pmf& p, const Objective& obj) override {
    state_ = absorb(state_, {uhat});
    return pasto_gradient(state_.mean, p, obj);
  }

  double estimated_objective(const Pmf& p, const Objective& obj) const override {
    return objective_value(obj, state_.mean.mix(p));
  }

 private:
  VhatState state_;
};

}  // namespace

std::unique_ptr<GradientRule> make_history_average_rule(VhatState initial) {
  return std::make_unique<HistoryAverageRule>(std::move(initial));
}

}  // namespace detail

RunResult pasto_run(Environment& env, const Objective& obj, const PastoConfig& cfg) {
  VhatState initial = cfg.prior ? VhatState::with_prior(*cfg.prior, cfg.prior_weight)
                                : VhatState::empty(env.metrics(), env.arms());
  auto rule = detail::make_history_average_rule(std::move(initial));
  return detail::run_mirror_loop(env, obj, cfg, *rule);
}

}  // namespace pasto
