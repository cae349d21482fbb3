#include "pasto/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pasto {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::ZeroSum: return "ZeroSum";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidObjective: return "InvalidObjective";
    case ErrorCode::NonDifferentiableObjective: return "NonDifferentiableObjective";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::ZeroProbability: return "ZeroProbability";
    case ErrorCode::ArmOutOfRange: return "ArmOutOfRange";
    case ErrorCode::EnvironmentFailure: return "EnvironmentFailure";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Pmf Pmf::from_weights(const Vector& raw) {
  if (raw.size() == 0) throw Error(ErrorCode::EmptyVector, "pmf needs at least one entry");
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) throw Error(ErrorCode::NonFiniteEntry, "pmf entry is not finite");
    if (raw[i] < 0.0) throw Error(ErrorCode::NegativeEntry, "pmf entry is negative");
  }
  const double sum = raw.sum();
  if (!(sum > 0.0)) throw Error(ErrorCode::ZeroSum, "pmf entries sum to zero");
  return Pmf(raw / sum);
}

Pmf Pmf::uniform(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::EmptyVector, "pmf needs at least one entry");
  return Pmf(Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)));
}

Pmf Pmf::one_hot(std::size_t k, std::size_t arm) {
  if (k == 0) throw Error(ErrorCode::EmptyVector, "pmf needs at least one entry");
  if (arm >= k) throw Error(ErrorCode::ArmOutOfRange, "one-hot arm out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(k));
  v[static_cast<Eigen::Index>(arm)] = 1.0;
  return Pmf(std::move(v));
}

Pmf make_pmf(const std::vector<double>& raw) {
  return Pmf::from_weights(Eigen::Map<const Vector>(raw.data(), static_cast<Eigen::Index>(raw.size())));
}

WeightVector::WeightVector(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw Error(ErrorCode::EmptyVector, "weight vector is empty");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i])) throw Error(ErrorCode::NonFiniteEntry, "weight is not finite");
    if (!(weights_[i] > 0.0)) throw Error(ErrorCode::NegativeEntry, "weight must be strictly positive");
  }
}

Pmf WeightVector::pmf() const { return Pmf::from_weights(weights_); }

MetricMatrix::MetricMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw Error(ErrorCode::EmptyVector, "metric matrix needs M >= 1 and K >= 1");
  }
  if (!values_.allFinite()) throw Error(ErrorCode::NonFiniteEntry, "metric matrix has a non-finite entry");
}

MetricMatrix MetricMatrix::zeros(std::size_t metrics, std::size_t arms) {
  return MetricMatrix(Matrix::Zero(static_cast<Eigen::Index>(metrics), static_cast<Eigen::Index>(arms)));
}

MetricMatrix MetricMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::EmptyVector, "metric matrix needs M >= 1 and K >= 1");
  }
  const auto k = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != k) throw Error(ErrorCode::DimensionMismatch, "metric matrix rows differ in length");
    for (std::size_t c = 0; c < k; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return MetricMatrix(std::move(m));
}

Vector MetricMatrix::mix(const Pmf& p) const {
  if (p.size() != arms()) throw Error(ErrorCode::DimensionMismatch, "pmf length differs from arm count");
  return values_ * p.probs();
}

bool Objective::differentiable() const {
  return std::none_of(guardrails.begin(), guardrails.end(),
                      [](const Guardrail& g) { return g.kind == GuardrailKind::HardBarrier; });
}

void Objective::validate(std::size_t metrics) const {
  if (primary >= metrics) throw Error(ErrorCode::InvalidObjective, "primary metric index out of range");
  std::set<std::size_t> seen{primary};
  for (const auto& g : guardrails) {
    if (g.metric >= metrics) throw Error(ErrorCode::InvalidObjective, "guardrail metric index out of range");
    if (!seen.insert(g.metric).second) throw Error(ErrorCode::InvalidObjective, "duplicate metric index in objective");
    if (!std::isfinite(g.threshold)) throw Error(ErrorCode::InvalidObjective, "guardrail threshold is not finite");
    if (g.kind == GuardrailKind::SoftSquare && (!std::isfinite(g.penalty) || g.penalty < 0.0)) {
      throw Error(ErrorCode::InvalidObjective, "soft guardrail penalty must be finite and >= 0");
    }
  }
}

double epsilon_at(const EpsilonSchedule& schedule, std::size_t t) {
  const double td = static_cast<double>(t);
  const double raw = std::visit(
      [td](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, TheoryGT>) {
          return s.g / std::sqrt(td);
        } else if constexpr (std::is_same_v<S, PaperSim>) {
          return s.a / std::sqrt(td + s.b);
        } else {
          return s.value;
        }
      },
      schedule);
  return std::clamp(raw, std::numeric_limits<double>::min(), 1.0);
}

void validate_schedule(const EpsilonSchedule& schedule) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, TheoryGT>) {
          if (!(s.g > 0.0) || !std::isfinite(s.g)) throw Error(ErrorCode::InvalidConfig, "epsilon G must be positive");
        } else if constexpr (std::is_same_v<S, PaperSim>) {
          if (!(s.a > 0.0) || !std::isfinite(s.a)) throw Error(ErrorCode::InvalidConfig, "epsilon a must be positive");
          if (!(s.b >= 0.0) || !std::isfinite(s.b)) throw Error(ErrorCode::InvalidConfig, "epsilon b must be >= 0");
        } else {
          if (!(s.value > 0.0 && s.value < 1.0)) {
            throw Error(ErrorCode::InvalidConfig, "constant epsilon must lie in (0, 1)");
          }
        }
      },
      schedule);
}

void PastoConfig::validate(std::size_t arms, std::size_t metrics) const {
  if (horizon == 0) throw Error(ErrorCode::InvalidConfig, "horizon must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidConfig, "gamma must be positive");
  validate_schedule(epsilon);
  if (parallel_q == 0 || parallel_q > arms) {
    throw Error(ErrorCode::InvalidConfig, "parallel_q must lie in [1, K]");
  }
  if (!(prior_weight >= 0.0) || !std::isfinite(prior_weight)) {
    throw Error(ErrorCode::InvalidConfig, "prior_weight must be >= 0");
  }
  if (prior && (prior->arms() != arms || prior->metrics() != metrics)) {
    throw Error(ErrorCode::DimensionMismatch, "prior shape differs from environment");
  }
  if (const auto* fixed = std::get_if<CapFixed>(&cap); fixed && !(fixed->value > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "fixed cap must be positive");
  }
}

}  // namespace pasto
