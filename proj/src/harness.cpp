#include "pasto/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "pasto/objective.hpp"

namespace pasto {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxInstanceDraws = 10000;

Scenario base_scenario(const ExperimentConfig& cfg, const ReplicaSeeds& seeds) {
  return std::visit(
      [&](const auto& k) -> Scenario {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SettingASpec>) {
          return setting_a(k.noise_variance);
        } else if constexpr (std::is_same_v<K, SettingBSpec>) {
          const std::uint64_t first = k.instance_seed.value_or(seeds.instance);
          for (std::size_t draw = 0; draw < kMaxInstanceDraws; ++draw) {
            const std::uint64_t seed = draw == 0 ? first : splitmix64(first + draw);
            Scenario s = setting_b(k.arms, seed, k.sigma);
            if (cfg.environment.objective) s.objective = *cfg.environment.objective;
            if (k.min_oracle_gap <= 0.0) return s;
            if (dominance_check(s.mu, s.objective, cfg.oracle_iters).gap > k.min_oracle_gap) return s;
          }
          throw Error(ErrorCode::ConfigError, "no setting_b instance met min_oracle_gap");
        } else {
          return Scenario{k.mu, k.sigma, Objective{}, 1};
        }
      },
      cfg.environment.kind);
}

bool instance_varies_by_replica(const ExperimentConfig& cfg) {
  const auto* b = std::get_if<SettingBSpec>(&cfg.environment.kind);
  return b != nullptr && !b->instance_seed.has_value();
}

double mean_skip_nan(const std::vector<double>& xs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    if (!std::isnan(x)) {
      sum += x;
      ++n;
    }
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

}  // namespace

ReplicaSetup make_replica_setup(const ExperimentConfig& cfg, std::size_t replica) {
  ReplicaSetup setup;
  setup.seeds = replica_seeds(cfg.seed, replica);
  setup.scenario = base_scenario(cfg, setup.seeds);
  if (cfg.environment.objective) setup.scenario.objective = *cfg.environment.objective;
  setup.drift = cfg.environment.drift;

  const auto& a = cfg.algorithm;
  const auto arms = setup.scenario.mu.arms();
  setup.pasto.horizon = a.horizon;
  setup.pasto.gamma = a.gamma.value_or(0.1 / static_cast<double>(arms));
  setup.pasto.epsilon = a.epsilon;
  setup.pasto.parallel_q = a.parallel_q.value_or(std::min(setup.scenario.default_q, arms));
  setup.pasto.prior = a.prior;
  setup.pasto.prior_weight = a.prior_weight;
  setup.pasto.cap = a.cap;
  setup.pasto.rng_seed = setup.seeds.algorithm;
  setup.beta_exponent = a.beta_exponent;
  return setup;
}

std::vector<MetricMatrix> running_mean_truth(const Environment& env, std::size_t horizon) {
  std::vector<MetricMatrix> out;
  out.reserve(horizon);
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(env.metrics()), static_cast<Eigen::Index>(env.arms()));
  for (std::size_t t = 1; t <= horizon; ++t) {
    auto mu = env.ground_truth(t);
    if (!mu) throw Error(ErrorCode::EnvironmentFailure, "environment has no ground truth");
    sum += mu->values();
    out.emplace_back(sum / static_cast<double>(t));
  }
  return out;
}

OracleBundle compute_oracles(const ReplicaSetup& setup, std::size_t horizon, std::size_t iters) {
  const auto& mu = setup.scenario.mu;
  const auto& obj = setup.scenario.objective;
  OracleBundle out{single_best_oracle(mu, obj), prob_oracle(mu, obj, iters), Pmf::uniform(mu.arms())};
  if (!setup.drift) {
    out.regret_comparator = out.prob.p;
    return out;
  }
  const SimulatedEnvironment env(mu, 0.0, 0, setup.drift);
  const auto running = running_mean_truth(env, horizon);
  auto value = [&](const Pmf& p) {
    double total = 0.0;
    for (const auto& m : running) total += objective_value(obj, m.mix(p));
    return total;
  };
  auto gradient = [&](const Pmf& p) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(mu.arms()));
    for (const auto& m : running) g += m.values().transpose() * objective_grad(obj, m.mix(p));
    return g;
  };
  out.regret_comparator = maximize_on_simplex(value, gradient, mu.arms(), iters).p;
  return out;
}

std::vector<double> regret_series(const Trajectory& traj, const std::vector<MetricMatrix>& running_mu,
                                  const Objective& obj, const Pmf& comparator) {
  // A single matrix stands for a stationary environment.
  if (running_mu.empty()) throw Error(ErrorCode::DimensionMismatch, "no ground truth for regret");
  if (running_mu.size() != 1 && running_mu.size() < traj.records.size()) {
    throw Error(ErrorCode::DimensionMismatch, "ground-truth series shorter than the trajectory");
  }
  std::vector<double> out;
  out.reserve(traj.records.size());
  double cumulative = 0.0;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& mu = running_mu.size() == 1 ? running_mu.front() : running_mu[i];
    cumulative += objective_value(obj, mu.mix(comparator)) - objective_value(obj, mu.mix(traj.records[i].p));
    out.push_back(cumulative);
  }
  return out;
}

RunResult run_replica(const ReplicaSetup& setup, AlgorithmKind kind) {
  SimulatedEnvironment env(setup.scenario.mu, setup.scenario.sigma, setup.seeds.noise, setup.drift);
  if (kind == AlgorithmKind::Pasto) return pasto_run(env, setup.scenario.objective, setup.pasto);
  return sscgd_run(env, setup.scenario.objective, SscgdConfig{setup.pasto, setup.beta_exponent});
}

std::vector<std::size_t> recorded_iterations(std::size_t horizon, std::size_t record_every) {
  std::vector<std::size_t> out;
  if (record_every == 0) record_every = 1;
  for (std::size_t t = record_every; t <= horizon; t += record_every) out.push_back(t);
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

ReplicaSeries summarize_replica(const ReplicaSetup& setup, const RunResult& run, const OracleBundle& oracles,
                                const std::vector<std::size_t>& recorded, bool report_true_objective) {
  const auto& obj = setup.scenario.objective;
  const auto& records = run.trajectory.records;
  const SimulatedEnvironment truth(setup.scenario.mu, 0.0, 0, setup.drift);
  const std::size_t arms = setup.scenario.mu.arms();

  std::vector<MetricMatrix> running;
  if (setup.drift) {
    running = running_mean_truth(truth, records.size());
  } else {
    running.push_back(setup.scenario.mu);
  }
  const auto regret = regret_series(run.trajectory, running, obj, oracles.regret_comparator);
  const double gap = oracles.prob.value - oracles.single.value;
  const bool gain_defined = std::abs(gap) > 1e-9;

  ReplicaSeries s;
  s.warnings = run.trajectory.warnings.size();
  s.min_floor_slack = std::numeric_limits<double>::infinity();
  Vector p_sum = Vector::Zero(static_cast<Eigen::Index>(arms));
  std::size_t next = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    p_sum += rec.p.probs();
    s.min_floor_slack = std::min(s.min_floor_slack, rec.p.min() - rec.epsilon / static_cast<double>(arms));
    if (next >= recorded.size() || rec.t != recorded[next]) continue;
    ++next;
    const Pmf pbar = Pmf::from_weights(p_sum / static_cast<double>(rec.t));
    if (report_true_objective) {
      const auto mu_t = truth.ground_truth(rec.t);
      s.objective.push_back(rec.true_objective.value_or(objective_value(obj, mu_t->mix(rec.p))));
      s.objective_pbar.push_back(objective_value(obj, mu_t->mix(pbar)));
      s.regret.push_back(regret[i]);
      s.relative_gain.push_back(gain_defined ? relative_gain(objective_value(obj, setup.scenario.mu.mix(pbar)),
                                                             oracles.single.value, oracles.prob.value)
                                             : kNaN);
    } else {
      s.objective.push_back(rec.vhat_objective);
      s.objective_pbar.push_back(kNaN);
      s.regret.push_back(kNaN);
      s.relative_gain.push_back(kNaN);
    }
  }
  s.final_pbar = run.p_bar.probs();
  return s;
}

std::vector<SeriesRow> aggregate(const std::vector<ReplicaSeries>& replicas, const std::vector<std::size_t>& recorded) {
  std::vector<SeriesRow> rows;
  rows.reserve(recorded.size());
  std::vector<double> obj, pbar, regret, gain;
  for (std::size_t j = 0; j < recorded.size(); ++j) {
    obj.clear();
    pbar.clear();
    regret.clear();
    gain.clear();
    for (const auto& r : replicas) {
      obj.push_back(r.objective.at(j));
      pbar.push_back(r.objective_pbar.at(j));
      regret.push_back(r.regret.at(j));
      gain.push_back(r.relative_gain.at(j));
    }
    rows.push_back({recorded[j], mean(obj), percentile_nearest_rank(obj, 25.0), percentile_nearest_rank(obj, 75.0),
                    mean(pbar), mean(regret), mean_skip_nan(gain)});
  }
  return rows;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("PASTO_THREADS")) {
    char* end = nullptr;
    const auto v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ResultBundle run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
  const auto recorded = recorded_iterations(cfg.algorithm.horizon, cfg.record_every);
  const bool per_replica_instance = instance_varies_by_replica(cfg);

  std::optional<OracleBundle> shared;
  if (!per_replica_instance) {
    shared = compute_oracles(make_replica_setup(cfg, 0), cfg.algorithm.horizon, cfg.oracle_iters);
  }

  std::vector<ReplicaSeries> series(cfg.replicas);
  std::vector<std::exception_ptr> failures(cfg.replicas);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.replicas; r = next++) {
      try {
        const auto setup = make_replica_setup(cfg, r);
        const auto oracles =
            shared ? *shared : compute_oracles(setup, cfg.algorithm.horizon, cfg.oracle_iters);
        const auto run = run_replica(setup, cfg.algorithm.kind);
        series[r] = summarize_replica(setup, run, oracles, recorded, cfg.report_true_objective);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, cfg.replicas);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  ResultBundle out;
  out.config = cfg;
  out.recorded_t = recorded;
  out.rows = aggregate(series, recorded);
  out.mean_final_pbar = Vector::Zero(series.front().final_pbar.size());
  for (const auto& s : series) out.mean_final_pbar += s.final_pbar;
  out.mean_final_pbar /= static_cast<double>(series.size());

  const auto setup0 = make_replica_setup(cfg, 0);
  std::size_t warnings = 0;
  double floor_slack = std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    warnings += s.warnings;
    floor_slack = std::min(floor_slack, s.min_floor_slack);
  }
  out.metadata = {{"algorithm", cfg.algorithm.kind == AlgorithmKind::Pasto ? "pasto" : "sscgd"},
                  {"gamma", setup0.pasto.gamma},
                  {"parallel_queries", setup0.pasto.parallel_q},
                  {"noise_sigma", setup0.scenario.sigma},
                  {"percentiles", "nearest-rank"},
                  {"replicas_with_overflow_warning", warnings},
                  {"min_simplex_floor_slack", floor_slack}};
  if (cfg.algorithm.kind == AlgorithmKind::Sscgd) {
    out.metadata["sscgd_schedule"] = {{"beta", "t^-" + format_number(cfg.algorithm.beta_exponent)},
                                      {"z_init", "Uhat_1 p_1"},
                                      {"note", "default schedule, not taken from the reference method"}};
  }
  if (shared) {
    out.metadata["oracle"] = {{"single_best_arm", shared->single.arm},
                              {"single_best_value", shared->single.value},
                              {"prob_value", shared->prob.value}};
  }
  out.replicas = std::move(series);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string to_csv(const ResultBundle& results) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : results.rows) {
    out += std::to_string(r.t);
    for (double v : {r.mean_obj, r.p25_obj, r.p75_obj, r.mean_obj_pbar, r.mean_regret, r.mean_relative_gain}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

json to_result_json(const ResultBundle& results) {
  auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  json rows = json::array();
  for (const auto& r : results.rows) {
    rows.push_back({{"t", r.t},
                    {"mean_obj", num(r.mean_obj)},
                    {"p25_obj", num(r.p25_obj)},
                    {"p75_obj", num(r.p75_obj)},
                    {"mean_obj_pbar", num(r.mean_obj_pbar)},
                    {"mean_regret", num(r.mean_regret)},
                    {"mean_relative_gain", num(r.mean_relative_gain)}});
  }
  json pbar = json::array();
  for (Eigen::Index k = 0; k < results.mean_final_pbar.size(); ++k) pbar.push_back(results.mean_final_pbar[k]);
  json meta = results.metadata;
  if (meta.contains("min_simplex_floor_slack")) meta["min_simplex_floor_slack"] = num(meta["min_simplex_floor_slack"].get<double>());
  return {{"config", to_json(results.config)}, {"metadata", meta}, {"rows", rows}, {"final_pbar", pbar}};
}

std::vector<std::filesystem::path> emit(const ResultBundle& results, OutputFormat format,
                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << body;
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
    written.push_back(path);
  };
  if (format == OutputFormat::Csv || format == OutputFormat::Both) write(dir / "results.csv", to_csv(results));
  if (format == OutputFormat::Json || format == OutputFormat::Both) {
    write(dir / "results.json", to_result_json(results).dump(2) + "\n");
  }
  return written;
}

}  // namespace pasto
