#include "pasto/cli.hpp"

#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pasto/baselines.hpp"
#include "pasto/config.hpp"
#include "pasto/harness.hpp"

namespace pasto {
namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> threads;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--replicas", o.replicas, "Monte Carlo replicas")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--threads", o.threads, "Worker threads (default: PASTO_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
}

void apply(const Overrides& o, ExperimentConfig& cfg) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.replicas) cfg.replicas = *o.replicas;
  if (o.out) cfg.output = *o.out;
  if (o.format) cfg.format = *o.format == "csv" ? OutputFormat::Csv : *o.format == "json" ? OutputFormat::Json
                                                                                          : OutputFormat::Both;
}

void run_and_emit(const ExperimentConfig& cfg, const Overrides& o, std::ostream& out) {
  const auto results = run_experiment(cfg, o.threads.value_or(default_threads()));
  for (const auto& path : emit(results, cfg.format, cfg.output)) out << "wrote " << path.string() << '\n';
  const auto& last = results.rows.back();
  out << "t=" << last.t << " mean_obj=" << format_number(last.mean_obj)
      << " mean_obj_pbar=" << format_number(last.mean_obj_pbar) << '\n';
}

void print_oracle(const ExperimentConfig& cfg, std::ostream& out) {
  const auto setup = make_replica_setup(cfg, 0);
  const auto& mu = setup.scenario.mu;
  const auto& obj = setup.scenario.objective;
  const auto d = dominance_check(mu, obj, cfg.oracle_iters);
  out << "single_best_arm " << d.det.arm << '\n';
  out << "single_best_value " << format_number(d.det_value) << '\n';
  out << "prob_value " << format_number(d.prob_value) << '\n';
  out << "prob_pmf";
  for (Eigen::Index k = 0; k < d.prob.p.probs().size(); ++k) out << ' ' << format_number(d.prob.p.probs()[k]);
  out << '\n';
  out << "dominance_gap " << format_number(d.gap) << '\n';
  if (mu.arms() == 2) out << "grid_prob_value " << format_number(prob_oracle_grid_k2(mu, obj).value) << '\n';
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

nlohmann::json parse_value(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return text;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic strategic-parameter optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::string sweep_param;
  std::string sweep_values;

  auto* run = app.add_subcommand("run", "Run an experiment and write results");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  add_overrides(run, overrides);

  auto* oracle = app.add_subcommand("oracle", "Print single-best and probabilistic optima");
  oracle->add_option("config", config_path, "Experiment config (JSON)")->required();
  add_overrides(oracle, overrides);

  auto* validate = app.add_subcommand("validate", "Check a config against the schema");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();

  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a config field");
  sweep->add_option("config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--param", sweep_param, "Dotted config path, e.g. algorithm.gamma")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  add_overrides(sweep, overrides);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (validate->parsed()) {
      const auto cfg = load_config(config_path);
      out << "ok: " << config_path << '\n';
      (void)cfg;
      return kExitOk;
    }
    if (run->parsed()) {
      auto cfg = load_config(config_path);
      apply(overrides, cfg);
      run_and_emit(cfg, overrides, out);
      return kExitOk;
    }
    if (oracle->parsed()) {
      auto cfg = load_config(config_path);
      apply(overrides, cfg);
      print_oracle(cfg, out);
      return kExitOk;
    }
    if (sweep->parsed()) {
      const auto text = read_file(config_path);
      (void)parse_config(text);
      const auto base = nlohmann::json::parse(text);
      const auto values = split_values(sweep_values);
      if (values.empty()) throw ConfigError("--values is empty", 0);
      std::vector<ExperimentConfig> configs;
      for (const auto& v : values) {
        auto doc = base;
        set_by_path(doc, sweep_param, parse_value(v));
        auto cfg = config_from_json(doc);
        apply(overrides, cfg);
        cfg.output = (std::filesystem::path(cfg.output) / (sweep_param + "=" + v)).string();
        configs.push_back(std::move(cfg));
      }
      for (const auto& cfg : configs) run_and_emit(cfg, overrides, out);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << config_path;
    if (e.line() > 0) err << ':' << e.line();
    err << ": " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::InvalidObjective ? kExitConfigError
                                                                                             : kExitRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

}  // namespace pasto
