#include "pasto/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace pasto {

using nlohmann::json;

namespace {

std::size_t line_at_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Best-effort: walks the quoted keys of `path` in document order.
std::size_t line_of_path(const std::string& text, const std::vector<std::string>& path) {
  if (text.empty() || path.empty()) return 0;
  std::size_t pos = 0;
  for (const auto& key : path) {
    const auto found = text.find("\"" + key + "\"", pos);
    if (found == std::string::npos) return pos == 0 ? 0 : line_at_offset(text, pos);
    pos = found;
  }
  return line_at_offset(text, pos);
}

std::string dotted(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& p : path) {
    if (!out.empty()) out += '.';
    out += p;
  }
  return out.empty() ? "<root>" : out;
}

class Section {
 public:
  Section(const json& node, std::vector<std::string> path, const std::string& text)
      : node_(node), path_(std::move(path)), text_(text) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::vector<std::string>& at, const std::string& msg) const {
    throw ConfigError(dotted(at) + ": " + msg, line_of_path(text_, at));
  }

  std::vector<std::string> at(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(at(key), "missing required key");
    return node_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(at(key), "expected a finite number");
    return d;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_int(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(at(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::size_t positive_int(const std::string& key) {
    const auto v = unsigned_int(key);
    if (v == 0) fail(at(key), "must be >= 1");
    return static_cast<std::size_t>(v);
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  Section child(const std::string& key) { return Section(raw(key), at(key), text_); }

  MetricMatrix matrix(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array() || v.empty()) fail(at(key), "expected a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : v) {
      if (!row.is_array() || row.empty()) fail(at(key), "each row must be a non-empty array of numbers");
      std::vector<double> r;
      for (const auto& x : row) {
        if (!x.is_number()) fail(at(key), "matrix entries must be numbers");
        r.push_back(x.get<double>());
      }
      rows.push_back(std::move(r));
    }
    try {
      return MetricMatrix::from_rows(rows);
    } catch (const Error& e) {
      fail(at(key), e.what());
    }
  }

  // Rejects keys that were never looked up.
  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail(at(key), "unknown key '" + key + "'");
    }
  }

  const std::vector<std::string>& path() const { return path_; }
  const std::string& text() const { return text_; }

 private:
  const json& node_;
  std::vector<std::string> path_;
  const std::string& text_;
  std::set<std::string> seen_;
};

Objective parse_objective(Section s) {
  Objective obj;
  obj.primary = static_cast<std::size_t>(s.unsigned_int("primary"));
  if (s.has("guardrails")) {
    const auto& arr = s.raw("guardrails");
    if (!arr.is_array()) s.fail(s.at("guardrails"), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto path = s.at("guardrails");
      path.push_back(std::to_string(i));
      Section g(arr[i], path, s.text());
      Guardrail gr;
      gr.metric = static_cast<std::size_t>(g.unsigned_int("metric"));
      gr.threshold = g.number("threshold");
      const auto kind = g.has("kind") ? g.string("kind") : std::string("soft");
      if (kind == "soft") {
        gr.kind = GuardrailKind::SoftSquare;
        gr.penalty = g.number("penalty");
      } else if (kind == "hard") {
        gr.kind = GuardrailKind::HardBarrier;
        if (g.has("penalty")) g.fail(g.at("penalty"), "hard guardrails take no penalty");
      } else {
        g.fail(g.at("kind"), "expected \"soft\" or \"hard\"");
      }
      g.finish();
      obj.guardrails.push_back(gr);
    }
  }
  s.finish();
  return obj;
}

EnvironmentSpec parse_environment(Section s) {
  EnvironmentSpec env;
  const auto type = s.string("type");
  if (type == "setting_a") {
    env.kind = SettingASpec{s.number_or("noise_variance", kSettingANoiseVariance)};
  } else if (type == "setting_b") {
    SettingBSpec b;
    b.arms = s.positive_int("arms");
    b.sigma = s.number("sigma");
    if (s.has("instance_seed")) b.instance_seed = s.unsigned_int("instance_seed");
    b.min_oracle_gap = s.number_or("min_oracle_gap", 0.0);
    if (b.arms < 2) s.fail(s.at("arms"), "setting_b needs at least 2 arms");
    env.kind = b;
  } else if (type == "custom") {
    env.kind = CustomSpec{s.matrix("mu"), s.number_or("sigma", 0.0)};
    if (!s.has("objective")) s.fail(s.at("objective"), "custom environments need an objective");
  } else {
    s.fail(s.at("type"), "expected setting_a, setting_b or custom");
  }
  if (s.has("drift")) {
    Section d = s.child("drift");
    Drift drift;
    drift.amplitude = d.number("amplitude");
    drift.period = d.number("period");
    drift.row = d.has("row") ? static_cast<std::size_t>(d.unsigned_int("row")) : 0;
    if (!(drift.period > 0.0)) d.fail(d.at("period"), "must be positive");
    d.finish();
    env.drift = drift;
  }
  if (s.has("objective")) env.objective = parse_objective(s.child("objective"));
  s.finish();
  return env;
}

EpsilonSchedule parse_epsilon(Section s) {
  const auto type = s.string("type");
  EpsilonSchedule out;
  if (type == "paper_sim") {
    out = PaperSim{s.number_or("a", 0.1), s.number_or("b", 10.0)};
  } else if (type == "theory") {
    out = TheoryGT{s.number("G")};
  } else if (type == "constant") {
    out = ConstantEpsilon{s.number("value")};
  } else {
    s.fail(s.at("type"), "expected paper_sim, theory or constant");
  }
  s.finish();
  try {
    validate_schedule(out);
  } catch (const Error& e) {
    s.fail(s.path(), e.what());
  }
  return out;
}

AlgorithmSpec parse_algorithm(Section s) {
  AlgorithmSpec a;
  const auto type = s.string("type");
  if (type == "pasto") {
    a.kind = AlgorithmKind::Pasto;
  } else if (type == "sscgd") {
    a.kind = AlgorithmKind::Sscgd;
  } else {
    s.fail(s.at("type"), "expected pasto or sscgd");
  }
  a.horizon = s.positive_int("horizon");
  if (s.has("gamma")) {
    a.gamma = s.number("gamma");
    if (!(*a.gamma > 0.0)) s.fail(s.at("gamma"), "must be positive");
  }
  if (s.has("parallel_queries")) a.parallel_q = s.positive_int("parallel_queries");
  if (s.has("epsilon")) a.epsilon = parse_epsilon(s.child("epsilon"));
  if (s.has("prior")) a.prior = s.matrix("prior");
  a.prior_weight = s.number_or("prior_weight", 1.0);
  if (a.prior_weight < 0.0) s.fail(s.at("prior_weight"), "must be >= 0");
  if (s.has("cap")) {
    const auto& c = s.raw("cap");
    if (c.is_string() && c.get<std::string>() == "auto") {
      a.cap = CapAuto{};
    } else if (c.is_string() && c.get<std::string>() == "none") {
      a.cap = CapNone{};
    } else if (c.is_number() && c.get<double>() > 0.0) {
      a.cap = CapFixed{c.get<double>()};
    } else {
      s.fail(s.at("cap"), "expected \"auto\", \"none\" or a positive number");
    }
  }
  if (s.has("beta_exponent")) {
    if (a.kind != AlgorithmKind::Sscgd) s.fail(s.at("beta_exponent"), "only valid for sscgd");
    a.beta_exponent = s.number("beta_exponent");
    if (a.beta_exponent < 0.0 || a.beta_exponent > 1.0) s.fail(s.at("beta_exponent"), "must lie in [0, 1]");
  }
  s.finish();
  return a;
}

json matrix_json(const MetricMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.metrics(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.arms(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json objective_json(const Objective& obj) {
  json g = json::array();
  for (const auto& gr : obj.guardrails) {
    json item = {{"metric", gr.metric}, {"threshold", gr.threshold}};
    if (gr.kind == GuardrailKind::SoftSquare) {
      item["kind"] = "soft";
      item["penalty"] = gr.penalty;
    } else {
      item["kind"] = "hard";
    }
    g.push_back(std::move(item));
  }
  return {{"primary", obj.primary}, {"guardrails", std::move(g)}};
}

}  // namespace

ExperimentConfig config_from_json(const json& doc, const std::string& text) {
  Section root(doc, {}, text);
  ExperimentConfig cfg;
  cfg.environment = parse_environment(root.child("environment"));
  cfg.algorithm = parse_algorithm(root.child("algorithm"));
  if (root.has("replicas")) cfg.replicas = root.positive_int("replicas");
  if (root.has("seed")) cfg.seed = root.unsigned_int("seed");
  if (root.has("record_every")) cfg.record_every = root.positive_int("record_every");
  if (root.has("output")) cfg.output = root.string("output");
  if (root.has("format")) {
    const auto f = root.string("format");
    if (f == "csv") {
      cfg.format = OutputFormat::Csv;
    } else if (f == "json") {
      cfg.format = OutputFormat::Json;
    } else if (f == "both") {
      cfg.format = OutputFormat::Both;
    } else {
      root.fail(root.at("format"), "expected csv, json or both");
    }
  }
  if (root.has("report_true_objective")) cfg.report_true_objective = root.boolean("report_true_objective");
  if (root.has("oracle_iters")) cfg.oracle_iters = root.positive_int("oracle_iters");
  root.finish();

  // Cross-field checks.
  std::size_t metrics = 0;
  std::size_t arms = 0;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SettingASpec>) {
          metrics = 2;
          arms = 2;
        } else if constexpr (std::is_same_v<K, SettingBSpec>) {
          metrics = 3;
          arms = k.arms;
        } else {
          metrics = k.mu.metrics();
          arms = k.mu.arms();
        }
      },
      cfg.environment.kind);
  if (cfg.environment.objective) {
    try {
      cfg.environment.objective->validate(metrics);
    } catch (const Error& e) {
      throw ConfigError(std::string("environment.objective: ") + e.what(),
                        line_of_path(text, {"environment", "objective"}));
    }
    if (!cfg.environment.objective->differentiable()) {
      throw ConfigError("environment.objective: optimization needs soft guardrails only",
                        line_of_path(text, {"environment", "objective"}));
    }
  }
  if (cfg.environment.drift && cfg.environment.drift->row >= metrics) {
    throw ConfigError("environment.drift.row: out of range", line_of_path(text, {"environment", "drift", "row"}));
  }
  if (cfg.algorithm.parallel_q && *cfg.algorithm.parallel_q > arms) {
    throw ConfigError("algorithm.parallel_queries: must not exceed the arm count",
                      line_of_path(text, {"algorithm", "parallel_queries"}));
  }
  if (cfg.algorithm.prior && (cfg.algorithm.prior->metrics() != metrics || cfg.algorithm.prior->arms() != arms)) {
    throw ConfigError("algorithm.prior: shape must be M x K of the environment",
                      line_of_path(text, {"algorithm", "prior"}));
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto byte = e.byte == 0 ? 0 : e.byte - 1;
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (const auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError("invalid JSON: " + msg, line_at_offset(text, byte));
  }
  return config_from_json(doc, text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0);
  }
  return parse_config(text);
}

json to_json(const ExperimentConfig& cfg) {
  json env;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SettingASpec>) {
          env = {{"type", "setting_a"}, {"noise_variance", k.noise_variance}};
        } else if constexpr (std::is_same_v<K, SettingBSpec>) {
          env = {{"type", "setting_b"}, {"arms", k.arms}, {"sigma", k.sigma}, {"min_oracle_gap", k.min_oracle_gap}};
          if (k.instance_seed) env["instance_seed"] = *k.instance_seed;
        } else {
          env = {{"type", "custom"}, {"mu", matrix_json(k.mu)}, {"sigma", k.sigma}};
        }
      },
      cfg.environment.kind);
  if (cfg.environment.drift) {
    const auto& d = *cfg.environment.drift;
    env["drift"] = {{"amplitude", d.amplitude}, {"period", d.period}, {"row", d.row}};
  }
  if (cfg.environment.objective) env["objective"] = objective_json(*cfg.environment.objective);

  const auto& a = cfg.algorithm;
  json alg = {{"type", a.kind == AlgorithmKind::Pasto ? "pasto" : "sscgd"},
              {"horizon", a.horizon},
              {"prior_weight", a.prior_weight}};
  if (a.gamma) alg["gamma"] = *a.gamma;
  if (a.parallel_q) alg["parallel_queries"] = *a.parallel_q;
  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, TheoryGT>) {
          alg["epsilon"] = {{"type", "theory"}, {"G", e.g}};
        } else if constexpr (std::is_same_v<E, PaperSim>) {
          alg["epsilon"] = {{"type", "paper_sim"}, {"a", e.a}, {"b", e.b}};
        } else {
          alg["epsilon"] = {{"type", "constant"}, {"value", e.value}};
        }
      },
      a.epsilon);
  if (a.prior) alg["prior"] = matrix_json(*a.prior);
  std::visit(
      [&](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, CapAuto>) {
          alg["cap"] = "auto";
        } else if constexpr (std::is_same_v<C, CapNone>) {
          alg["cap"] = "none";
        } else {
          alg["cap"] = c.value;
        }
      },
      a.cap);
  if (a.kind == AlgorithmKind::Sscgd) alg["beta_exponent"] = a.beta_exponent;

  const char* format = cfg.format == OutputFormat::Csv ? "csv" : cfg.format == OutputFormat::Json ? "json" : "both";
  return {{"environment", std::move(env)},
          {"algorithm", std::move(alg)},
          {"replicas", cfg.replicas},
          {"seed", cfg.seed},
          {"record_every", cfg.record_every},
          {"output", cfg.output},
          {"format", format},
          {"report_true_objective", cfg.report_true_objective},
          {"oracle_iters", cfg.oracle_iters}};
}

void set_by_path(json& doc, const std::string& dotted_path, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_path.find('.', start);
    const auto key = dotted_path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("empty segment in parameter path '" + dotted_path + "'", 0);
    if (!node->is_object()) throw ConfigError("parameter path '" + dotted_path + "' crosses a non-object", 0);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace pasto
