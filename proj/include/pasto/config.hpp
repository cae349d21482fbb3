#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "pasto/environment.hpp"
#include "pasto/types.hpp"

namespace pasto {

struct SettingASpec {
  double noise_variance = kSettingANoiseVariance;
};

struct SettingBSpec {
  std::size_t arms = 100;
  double sigma = 0.1;
  // Fixed ground truth for every replica; otherwise each replica draws its own.
  std::optional<std::uint64_t> instance_seed;
  // Redraw instances until prob - single-best oracle gap exceeds this.
  double min_oracle_gap = 0.0;
};

struct CustomSpec {
  MetricMatrix mu = MetricMatrix::zeros(1, 1);
  double sigma = 0.0;
};

struct EnvironmentSpec {
  std::variant<SettingASpec, SettingBSpec, CustomSpec> kind = SettingASpec{};
  std::optional<Drift> drift;
  // Overrides the scenario's objective; required for custom environments.
  std::optional<Objective> objective;
};

enum class AlgorithmKind { Pasto, Sscgd };
enum class OutputFormat { Csv, Json, Both };

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::Pasto;
  // gamma and parallel_q left empty resolve to 0.1 / K and the scenario default.
  std::optional<double> gamma;
  std::optional<std::size_t> parallel_q;
  std::size_t horizon = 1000;
  EpsilonSchedule epsilon = PaperSim{};
  std::optional<MetricMatrix> prior;
  double prior_weight = 1.0;
  CapPolicy cap = CapAuto{};
  double beta_exponent = 0.75;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  AlgorithmSpec algorithm;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  std::size_t record_every = 1;
  std::string output = "out";
  OutputFormat format = OutputFormat::Csv;
  bool report_true_objective = true;
  std::size_t oracle_iters = 20000;
};

// Thrown for malformed or invalid configs. `line` is 1-based, 0 if unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : Error(ErrorCode::ConfigError, what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Parses and validates a config document. `text` is used to anchor schema
// errors to a line. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::string& text = {});
ExperimentConfig load_config(const std::string& path);

// Canonical JSON form; config_from_json(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& cfg);

// Sets the value at a dotted path (e.g. "algorithm.gamma"), creating
// intermediate objects as needed.
void set_by_path(nlohmann::json& doc, const std::string& dotted_path, const nlohmann::json& value);

std::string read_file(const std::string& path);

}  // namespace pasto
