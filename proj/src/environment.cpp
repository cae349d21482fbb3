#include "pasto/environment.hpp"

#include <cmath>
#include <numbers>

namespace pasto {

SimulatedEnvironment::SimulatedEnvironment(MetricMatrix mu, double sigma, std::uint64_t seed,
                                           std::optional<Drift> drift)
    : mu_(std::move(mu)), sigma_(sigma), drift_(drift), rng_(seed) {
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  if (drift_) {
    if (drift_->row >= mu_.metrics()) throw Error(ErrorCode::InvalidConfig, "drift row out of range");
    if (!(drift_->period > 0.0) || !std::isfinite(drift_->amplitude)) {
      throw Error(ErrorCode::InvalidConfig, "drift needs a positive period and finite amplitude");
    }
  }
}

Vector SimulatedEnvironment::query(std::size_t arm, std::size_t t) {
  if (arm >= arms()) throw Error(ErrorCode::ArmOutOfRange, "queried arm out of range");
  Vector v = mu_.column(arm);
  if (drift_) {
    v[static_cast<Eigen::Index>(drift_->row)] +=
        drift_->amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / drift_->period);
  }
  if (sigma_ > 0.0) {
    for (Eigen::Index m = 0; m < v.size(); ++m) v[m] += sigma_ * normal_(rng_);
  }
  return v;
}

std::optional<MetricMatrix> SimulatedEnvironment::ground_truth(std::size_t t) const {
  if (!drift_) return mu_;
  Matrix m = mu_.values();
  m.row(static_cast<Eigen::Index>(drift_->row)).array() +=
      drift_->amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / drift_->period);
  return MetricMatrix(std::move(m));
}

Scenario setting_a(double noise_variance) {
  if (!(noise_variance >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise variance must be >= 0");
  Objective obj;
  obj.primary = 0;
  obj.guardrails.push_back({1, 0.0, 5.0, GuardrailKind::SoftSquare});
  return {MetricMatrix::from_rows({{2.0, 0.0}, {-2.0, 2.0}}), std::sqrt(noise_variance), obj, 1};
}

Scenario setting_b(std::size_t arms, std::uint64_t seed, double sigma) {
  if (arms < 2) throw Error(ErrorCode::InvalidConfig, "setting B needs K >= 2");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix mu(3, static_cast<Eigen::Index>(arms));
  // Arm-major draw order: each arm's (x, y1, y2) in turn.
  for (Eigen::Index k = 0; k < mu.cols(); ++k) {
    for (Eigen::Index m = 0; m < 3; ++m) mu(m, k) = unif(rng);
  }
  Objective obj;
  obj.primary = 0;
  obj.guardrails.push_back({1, 0.5, 5.0, GuardrailKind::SoftSquare});
  obj.guardrails.push_back({2, 0.5, 5.0, GuardrailKind::SoftSquare});
  return {MetricMatrix(std::move(mu)), sigma, obj, 10};
}

double relative_gain(double f_now, double f_single, double f_prob_opt) {
  const double gap = f_prob_opt - f_single;
  if (!(std::abs(gap) > 1e-9)) throw Error(ErrorCode::DegenerateGap, "oracle gap is too small for a relative gain");
  return (f_now - f_single) / gap;
}

}  // namespace pasto
