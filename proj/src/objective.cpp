#include "pasto/objective.hpp"

#include <algorithm>
#include <limits>

namespace pasto {
namespace {

void check_dims(const Objective& obj, const Vector& z) {
  const auto m = static_cast<std::size_t>(z.size());
  if (obj.primary >= m) throw Error(ErrorCode::DimensionMismatch, "objective metric index exceeds z length");
  for (const auto& g : obj.guardrails) {
    if (g.metric >= m) throw Error(ErrorCode::DimensionMismatch, "objective metric index exceeds z length");
  }
}

}  // namespace

double objective_value(const Objective& obj, const Vector& z) {
  check_dims(obj, z);
  double value = z[static_cast<Eigen::Index>(obj.primary)];
  for (const auto& g : obj.guardrails) {
    const double slack = z[static_cast<Eigen::Index>(g.metric)] - g.threshold;
    if (g.kind == GuardrailKind::HardBarrier) {
      if (slack < 0.0) return -std::numeric_limits<double>::infinity();
    } else {
      const double shortfall = std::min(0.0, slack);
      value -= g.penalty * shortfall * shortfall;
    }
  }
  return value;
}

Vector objective_grad(const Objective& obj, const Vector& z) {
  if (!obj.differentiable()) {
    throw Error(ErrorCode::NonDifferentiableObjective, "hard-barrier objectives have no gradient");
  }
  check_dims(obj, z);
  Vector grad = Vector::Zero(z.size());
  grad[static_cast<Eigen::Index>(obj.primary)] = 1.0;
  for (const auto& g : obj.guardrails) {
    const auto i = static_cast<Eigen::Index>(g.metric);
    grad[i] = -2.0 * g.penalty * std::min(0.0, z[i] - g.threshold);
  }
  return grad;
}

}  // namespace pasto
