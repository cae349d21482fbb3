#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pasto {

// SplitMix64 finalizer over state + increment.
std::uint64_t splitmix64(std::uint64_t state);

// Independent streams for one Monte Carlo replica.
struct ReplicaSeeds {
  std::uint64_t algorithm = 0;  // arm draws
  std::uint64_t noise = 0;      // environment noise
  std::uint64_t instance = 0;   // random ground truth (setting B)
};

ReplicaSeeds replica_seeds(std::uint64_t master_seed, std::uint64_t replica);

// Nearest-rank percentile (rank = ceil(q/100 * n), 1-based); q in (0, 100].
// NaN for empty input.
double percentile_nearest_rank(std::span<const double> values, double q);

double mean(std::span<const double> values);

}  // namespace pasto
