#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pasto/baselines.hpp"
#include "pasto/config.hpp"
#include "pasto/environment.hpp"
#include "pasto/pasto.hpp"
#include "pasto/stats.hpp"

namespace pasto {

// One replica's concrete problem: ground truth, noise, objective and the
// resolved algorithm settings.
struct ReplicaSetup {
  Scenario scenario;
  std::optional<Drift> drift;
  ReplicaSeeds seeds;
  PastoConfig pasto;
  double beta_exponent = 0.75;
};

ReplicaSetup make_replica_setup(const ExperimentConfig& cfg, std::size_t replica);

// Noiseless reference values for a ground truth. For drifting environments
// the comparator maximizes the summed objective on running-average metrics
// over the whole horizon.
struct OracleBundle {
  SingleBest single;
  ProbOptimum prob;
  Pmf regret_comparator = Pmf::uniform(1);
};

OracleBundle compute_oracles(const ReplicaSetup& setup, std::size_t horizon, std::size_t iters);

// Mean metrics over iterations 1..t, i.e. (1/t) sum_s mu_s, for t = 1..T.
std::vector<MetricMatrix> running_mean_truth(const Environment& env, std::size_t horizon);

// Cumulative regret sum_{s<=t} [f(mubar_s p*) - f(mubar_s p_s)] for t = 1..T.
std::vector<double> regret_series(const Trajectory& traj, const std::vector<MetricMatrix>& running_mu,
                                  const Objective& obj, const Pmf& comparator);

RunResult run_replica(const ReplicaSetup& setup, AlgorithmKind kind);

// Per-recorded-iteration series for one replica.
struct ReplicaSeries {
  std::vector<double> objective;       // f(mu_t p_t), or the V-hat objective without ground truth
  std::vector<double> objective_pbar;  // f(mu_t pbar_t)
  std::vector<double> regret;
  std::vector<double> relative_gain;   // NaN when the oracle gap is degenerate
  Vector final_pbar;
  double min_floor_slack = 0.0;        // min over t of (min_k p_t - eps_t / K)
  std::size_t warnings = 0;
};

struct SeriesRow {
  std::size_t t = 0;
  double mean_obj = 0.0;
  double p25_obj = 0.0;
  double p75_obj = 0.0;
  double mean_obj_pbar = 0.0;
  double mean_regret = 0.0;
  double mean_relative_gain = 0.0;
};

struct ResultBundle {
  ExperimentConfig config;
  std::vector<std::size_t> recorded_t;
  std::vector<SeriesRow> rows;
  std::vector<ReplicaSeries> replicas;
  Vector mean_final_pbar;
  nlohmann::json metadata;
};

// Iterations that get a row: multiples of record_every, plus T.
std::vector<std::size_t> recorded_iterations(std::size_t horizon, std::size_t record_every);

ReplicaSeries summarize_replica(const ReplicaSetup& setup, const RunResult& run, const OracleBundle& oracles,
                                const std::vector<std::size_t>& recorded, bool report_true_objective);

std::vector<SeriesRow> aggregate(const std::vector<ReplicaSeries>& replicas, const std::vector<std::size_t>& recorded);

// Worker count from PASTO_THREADS, else hardware concurrency.
std::size_t default_threads();

// Runs all replicas on `threads` workers. Output does not depend on the
// worker count.
ResultBundle run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1);

inline constexpr const char* kCsvHeader =
    "t,mean_obj,p25_obj,p75_obj,mean_obj_pbar,mean_regret,mean_relative_gain";

// Shortest-safe round-trip text: 17 significant digits.
std::string format_number(double v);

std::string to_csv(const ResultBundle& results);
nlohmann::json to_result_json(const ResultBundle& results);

// Writes results.csv and/or results.json under `dir`; returns the paths.
std::vector<std::filesystem::path> emit(const ResultBundle& results, OutputFormat format,
                                        const std::filesystem::path& dir);

}  // namespace pasto
