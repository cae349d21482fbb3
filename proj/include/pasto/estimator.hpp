#pragma once

#include <limits>
#include <vector>

#include "pasto/types.hpp"

namespace pasto {

// Running history average V-hat of the importance-weighted estimates.
struct VhatState {
  MetricMatrix mean;
  double count = 0.0;

  static VhatState empty(std::size_t metrics, std::size_t arms) {
    return {MetricMatrix::zeros(metrics, arms), 0.0};
  }
  static VhatState with_prior(const MetricMatrix& prior, double weight) { return {prior, weight}; }
};

// Sparse importance-weighted estimate: column `obs.arm` holds
// obs.metrics / obs.sample_prob clamped to [-cap, cap]; all else zero.
MetricMatrix build_uhat(const Observation& obs, std::size_t arms, std::size_t metrics,
                        double cap = std::numeric_limits<double>::infinity());

// Averages the matrices of one iteration and absorbs them as one unit of
// weight. Throws DimensionMismatch.
VhatState absorb(const VhatState& state, const std::vector<MetricMatrix>& uhats);

// vhat^T * grad f(vhat * p).
Vector pasto_gradient(const MetricMatrix& vhat, const Pmf& p, const Objective& obj);

}  // namespace pasto
