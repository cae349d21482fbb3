#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace pasto {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  EmptyVector,
  NegativeEntry,
  ZeroSum,
  NonFiniteEntry,
  DimensionMismatch,
  InvalidObjective,
  NonDifferentiableObjective,
  InvalidConfig,
  InvalidEpsilon,
  NonFiniteGradient,
  ZeroProbability,
  ArmOutOfRange,
  EnvironmentFailure,
  DegenerateGap,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Probability mass function over K arms. Always normalized; entries that
// drift by less than kSumTolerance are renormalized silently.
class Pmf {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Normalizes raw nonnegative weights. Throws EmptyVector, NegativeEntry,
  // NonFiniteEntry or ZeroSum.
  static Pmf from_weights(const Vector& raw);
  static Pmf uniform(std::size_t k);
  static Pmf one_hot(std::size_t k, std::size_t arm);

  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_[static_cast<Eigen::Index>(i)]; }
  const Vector& probs() const { return probs_; }
  double min() const { return probs_.minCoeff(); }

 private:
  explicit Pmf(Vector probs) : probs_(std::move(probs)) {}
  Vector probs_;
};

Pmf make_pmf(const std::vector<double>& raw);

// Unnormalized exponentiated-gradient weights; strictly positive and finite.
class WeightVector {
 public:
  explicit WeightVector(Vector weights);
  static WeightVector ones(std::size_t k) { return WeightVector(Vector::Ones(static_cast<Eigen::Index>(k))); }

  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  const Vector& weights() const { return weights_; }
  Pmf pmf() const;

 private:
  Vector weights_;
};

// M x K matrix of per-arm metrics: rows are metrics, columns are arms.
class MetricMatrix {
 public:
  explicit MetricMatrix(Matrix values);
  static MetricMatrix zeros(std::size_t metrics, std::size_t arms);
  static MetricMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t metrics() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t arms() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }
  double operator()(std::size_t m, std::size_t k) const {
    return values_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  }
  Vector column(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }

  // Mixture metrics mu * p.
  Vector mix(const Pmf& p) const;

 private:
  Matrix values_;
};

enum class GuardrailKind { SoftSquare, HardBarrier };

struct Guardrail {
  std::size_t metric = 0;
  double threshold = 0.0;
  double penalty = 0.0;  // ignored for HardBarrier
  GuardrailKind kind = GuardrailKind::SoftSquare;
};

// f(z) = z[primary] - sum of guardrail penalties.
struct Objective {
  std::size_t primary = 0;
  std::vector<Guardrail> guardrails;

  bool differentiable() const;
  // Throws InvalidObjective on duplicate or out-of-range metric indices and
  // on negative or non-finite penalties.
  void validate(std::size_t metrics) const;
};

struct TheoryGT {
  double g = 1.0;
};
struct PaperSim {
  double a = 0.1;
  double b = 10.0;
};
struct ConstantEpsilon {
  double value = 0.1;
};

using EpsilonSchedule = std::variant<TheoryGT, PaperSim, ConstantEpsilon>;

// Realized epsilon at iteration t >= 1, clamped into (0, 1].
double epsilon_at(const EpsilonSchedule& schedule, std::size_t t);
void validate_schedule(const EpsilonSchedule& schedule);

// Estimator cap policy. Auto: running max |metric| * K / eps_t.
struct CapAuto {};
struct CapNone {};
struct CapFixed {
  double value = 0.0;
};
using CapPolicy = std::variant<CapAuto, CapNone, CapFixed>;

struct PastoConfig {
  std::size_t horizon = 1000;
  double gamma = 0.05;
  EpsilonSchedule epsilon = PaperSim{};
  std::size_t parallel_q = 1;
  std::optional<MetricMatrix> prior;
  // Pseudo-observation count given to the prior; 1 reproduces the recursive
  // update literally, 0 reproduces the plain history average.
  double prior_weight = 1.0;
  CapPolicy cap = CapAuto{};
  std::uint64_t rng_seed = 0;
  // Divide weights by their max after every step; never changes p_t.
  bool rescale_weights = true;

  // Throws InvalidConfig. `arms` is the environment's arm count.
  void validate(std::size_t arms, std::size_t metrics) const;
};

struct Observation {
  std::size_t arm = 0;
  Vector metrics;
  double sample_prob = 1.0;
};

struct IterationRecord {
  std::size_t t = 0;
  Pmf p = Pmf::uniform(1);
  double epsilon = 0.0;
  std::vector<Observation> observations;
  Vector gradient;
  double vhat_objective = 0.0;
  std::optional<double> true_objective;
};

struct Trajectory {
  std::vector<IterationRecord> records;
  Pmf p_bar = Pmf::uniform(1);
  // Non-fatal diagnostics, e.g. the exp-overflow guard.
  std::vector<std::string> warnings;
};

}  // namespace pasto
