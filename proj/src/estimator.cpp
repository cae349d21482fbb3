#include "pasto/estimator.hpp"

#include <algorithm>

#include "pasto/objective.hpp"

namespace pasto {

MetricMatrix build_uhat(const Observation& obs, std::size_t arms, std::size_t metrics, double cap) {
  if (obs.arm >= arms) throw Error(ErrorCode::ArmOutOfRange, "observation arm out of range");
  if (!(obs.sample_prob > 0.0)) throw Error(ErrorCode::ZeroProbability, "observation has zero sampling probability");
  if (static_cast<std::size_t>(obs.metrics.size()) != metrics) {
    throw Error(ErrorCode::DimensionMismatch, "observation metric count differs from M");
  }
  Matrix u = Matrix::Zero(static_cast<Eigen::Index>(metrics), static_cast<Eigen::Index>(arms));
  const auto col = static_cast<Eigen::Index>(obs.arm);
  for (Eigen::Index m = 0; m < u.rows(); ++m) {
    u(m, col) = std::clamp(obs.metrics[m] / obs.sample_prob, -cap, cap);
  }
  return MetricMatrix(std::move(u));
}

VhatState absorb(const VhatState& state, const std::vector<MetricMatrix>& uhats) {
  if (uhats.empty()) return state;
  Matrix sum = Matrix::Zero(state.mean.values().rows(), state.mean.values().cols());
  for (const auto& u : uhats) {
    if (u.metrics() != state.mean.metrics() || u.arms() != state.mean.arms()) {
      throw Error(ErrorCode::DimensionMismatch, "absorbed matrix shape differs from V-hat");
    }
    sum += u.values();
  }
  const Matrix batch = sum / static_cast<double>(uhats.size());
  const double count = state.count + 1.0;
  // mean_n = mean_{n-1} + (x - mean_{n-1}) / n
  Matrix mean = state.mean.values() + (batch - state.mean.values()) / count;
  return {MetricMatrix(std::move(mean)), count};
}

Vector pasto_gradient(const MetricMatrix& vhat, const Pmf& p, const Objective& obj) {
  const Vector z = vhat.mix(p);
  return vhat.values().transpose() * objective_grad(obj, z);
}

}  // namespace pasto
