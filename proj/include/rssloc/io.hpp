#pragma once

// JSON and CSV forms of scenarios, configs, reports and sweep results.

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rssloc/baselines.hpp"
#include "rssloc/errors.hpp"
#include "rssloc/harness.hpp"
#include "rssloc/measurement_model.hpp"
#include "rssloc/obl_saa.hpp"

namespace rssloc {

using json = nlohmann::json;

/// Shortest decimal that round-trips.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw ValidationError(std::string(what) + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline Position position_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(std::string(what) + ": expected [x1, x2]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(Position p) { return json::array({p.x1, p.x2}); }

// Maps nlohmann type errors onto ValidationError.
template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

inline json to_json(const Bounds& b) { return {{"min", detail::to_json(b.min)}, {"max", detail::to_json(b.max)}}; }

inline Bounds bounds_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"min", "max"}, "bounds");
  Bounds b{detail::position_from_json(j.at("min"), "bounds.min"), detail::position_from_json(j.at("max"), "bounds.max")};
  b.validate();
  return b;
}

inline json to_json(const PathLossParams& p) {
  return {{"p0", p.p0}, {"gamma", p.gamma}, {"d0", p.d0}, {"sigma", p.sigma}};
}

inline PathLossParams params_from_json(const json& j) {
  return detail::guarded("params", [&] {
    detail::reject_unknown_keys(j, {"p0", "gamma", "d0", "sigma"}, "params");
    PathLossParams p;
    p.p0 = j.at("p0").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.d0 = detail::get_or(j, "d0", 1.0);
    p.sigma = j.at("sigma").get<double>();
    p.validate();
    return p;
  });
}

inline json to_json(const Scenario& s) {
  json anchors = json::array();
  for (const Position& a : s.anchors) anchors.push_back(detail::to_json(a));
  return {{"anchors", anchors}, {"params", to_json(s.params)}, {"bounds", to_json(s.bounds)}};
}

/// `bounds` may be omitted and defaults to [0, 40]^2.
inline Scenario scenario_from_json(const json& j) {
  return detail::guarded("scenario", [&] {
    detail::reject_unknown_keys(j, {"anchors", "params", "bounds"}, "scenario");
    Scenario s;
    const json& anchors = j.at("anchors");
    if (!anchors.is_array()) throw ValidationError("scenario: 'anchors' must be an array");
    for (const json& a : anchors) s.anchors.push_back(detail::position_from_json(a, "scenario.anchors"));
    s.params = params_from_json(j.at("params"));
    if (j.contains("bounds")) s.bounds = bounds_from_json(j.at("bounds"));
    s.validate();
    return s;
  });
}

inline json to_json(const MeasurementSet& m) { return m.p; }

inline MeasurementSet measurements_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("measurements: expected a JSON array of numbers");
  MeasurementSet m;
  for (const json& v : j) {
    if (!v.is_number()) throw ValidationError("measurements: expected a JSON array of numbers");
    m.p.push_back(v.get<double>());
  }
  return m;
}

inline json to_json(const SaaConfig& c) {
  json policy = c.t0_policy.kind == TemperaturePolicy::Kind::Fixed
                    ? json{{"type", "fixed"}, {"value", c.t0_policy.value}}
                    : json{{"type", "cost_scaled"}};
  return {{"epsilon", c.epsilon}, {"lambda", c.lambda}, {"n_max", c.n_max},       {"k", c.k},
          {"t0_policy", policy},  {"seed", c.seed},     {"min_step_ratio", c.min_step_ratio}};
}

/// Missing keys take their defaults.
inline SaaConfig config_from_json(const json& j) {
  return detail::guarded("config", [&] {
    detail::reject_unknown_keys(j, {"epsilon", "lambda", "n_max", "k", "t0_policy", "seed", "min_step_ratio"},
                                "config");
    SaaConfig c;
    c.epsilon = detail::get_or(j, "epsilon", c.epsilon);
    c.lambda = detail::get_or(j, "lambda", c.lambda);
    c.n_max = detail::get_or(j, "n_max", c.n_max);
    c.k = detail::get_or(j, "k", c.k);
    c.seed = detail::get_or(j, "seed", c.seed);
    c.min_step_ratio = detail::get_or(j, "min_step_ratio", c.min_step_ratio);
    if (j.contains("t0_policy")) {
      const json& p = j.at("t0_policy");
      detail::reject_unknown_keys(p, {"type", "value"}, "config.t0_policy");
      const auto type = p.at("type").get<std::string>();
      if (type == "cost_scaled") {
        c.t0_policy = TemperaturePolicy::cost_scaled();
      } else if (type == "fixed") {
        c.t0_policy = TemperaturePolicy::fixed(p.at("value").get<double>());
      } else {
        throw ValidationError("config.t0_policy: unknown type '" + type + "'");
      }
    }
    c.validate();
    return c;
  });
}

inline json to_json(const SolveReport& r) {
  return {{"estimate", detail::to_json(r.estimate)},
          {"cost", r.cost},
          {"winning_branch", to_string(r.winning_branch)},
          {"branch_costs", {{"original", r.original_cost}, {"opposing", r.opposing_cost}}},
          {"branch_estimates",
           {{"original", detail::to_json(r.original_estimate)}, {"opposing", detail::to_json(r.opposing_estimate)}}},
          {"starts",
           {{"original", detail::to_json(r.original_start)}, {"opposing", detail::to_json(r.opposing_start)}}}};
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "branch,iteration,x1,x2,cost,temperature\n";
  for (const TraceRow& t : trace) {
    os << to_string(t.branch) << ',' << t.iteration << ',' << format_double(t.position.x1) << ','
       << format_double(t.position.x2) << ',' << format_double(t.cost) << ',' << format_double(t.temperature)
       << '\n';
  }
}

inline void write_surface_csv(std::ostream& os, const std::vector<SurfacePoint>& surface) {
  os << "x1,x2,cost\n";
  for (const SurfacePoint& p : surface) {
    os << format_double(p.x1) << ',' << format_double(p.x2) << ',' << format_double(p.cost) << '\n';
  }
}

// Sweep results.

inline json to_json(const SweepResult& r) {
  json methods = json::array();
  for (const MethodSummary& m : r.methods) {
    methods.push_back({{"method", m.method}, {"rmse_m", m.rmse}, {"mean_runtime_s", m.mean_runtime}});
  }
  return {{"setting_name", r.setting_name},
          {"setting_value", r.setting_value},
          {"trials", r.trials},
          {"methods", methods},
          {"mean_crlb_m", r.mean_crlb ? json(*r.mean_crlb) : json(nullptr)},
          {"opposing_wins", r.opposing_wins}};
}

inline json to_json(const std::vector<SweepResult>& results) {
  json arr = json::array();
  for (const auto& r : results) arr.push_back(to_json(r));
  return arr;
}

inline std::vector<SweepResult> sweep_results_from_json(const json& j) {
  return detail::guarded("sweep results", [&] {
    if (!j.is_array()) throw ValidationError("sweep results: expected an array");
    std::vector<SweepResult> out;
    for (const json& e : j) {
      SweepResult r;
      r.setting_name = e.at("setting_name").get<std::string>();
      r.setting_value = e.at("setting_value").get<double>();
      r.trials = e.at("trials").get<std::size_t>();
      for (const json& m : e.at("methods")) {
        r.methods.push_back(
            {m.at("method").get<std::string>(), m.at("rmse_m").get<double>(), m.at("mean_runtime_s").get<double>()});
      }
      if (!e.at("mean_crlb_m").is_null()) r.mean_crlb = e.at("mean_crlb_m").get<double>();
      r.opposing_wins = detail::get_or<std::size_t>(e, "opposing_wins", 0);
      out.push_back(std::move(r));
    }
    return out;
  });
}

/// setting_name,setting_value,method,rmse_m,mean_crlb_m,mean_runtime_s,trials; one row per method.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results) {
  os << "setting_name,setting_value,method,rmse_m,mean_crlb_m,mean_runtime_s,trials\n";
  for (const SweepResult& r : results) {
    for (const MethodSummary& m : r.methods) {
      os << r.setting_name << ',' << format_double(r.setting_value) << ',' << m.method << ','
         << format_double(m.rmse) << ',' << (r.mean_crlb ? format_double(*r.mean_crlb) : std::string()) << ','
         << format_double(m.mean_runtime) << ',' << r.trials << '\n';
    }
  }
}

inline void write_trials_csv(std::ostream& os, const std::string& setting_name, double setting_value,
                             const std::vector<TrialRecord>& records) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  os << "setting_name,setting_value,trial_index,truth_x1,truth_x2,estimate_x1,estimate_x2,error_m,cost,"
        "winning_branch,lls_error_m,oracle_error_m,oracle_cost,crlb_m,runtime_s\n";
  for (const TrialRecord& t : records) {
    os << setting_name << ',' << format_double(setting_value) << ',' << t.trial_index << ','
       << format_double(t.truth.x1) << ',' << format_double(t.truth.x2) << ',' << format_double(t.estimate.x1)
       << ',' << format_double(t.estimate.x2) << ',' << format_double(t.error) << ',' << format_double(t.cost)
       << ',' << to_string(t.winning_branch) << ',' << opt(t.lls_error) << ',' << opt(t.oracle_error) << ','
       << opt(t.oracle_cost) << ',' << opt(t.crlb) << ',' << format_double(t.runtime) << '\n';
  }
}

enum class ExportFormat { Csv, Json };

inline void export_results(const std::vector<SweepResult>& results, ExportFormat format, const std::string& path) {
  if (results.empty()) throw EmptyAggregateError("export_results: no results to export");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  if (format == ExportFormat::Csv) {
    write_sweep_csv(out, results);
  } else {
    out << to_json(results).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

// File helpers.

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

inline std::vector<SweepResult> import_results_json(const std::string& path) {
  return sweep_results_from_json(read_json_file(path));
}

}  // namespace rssloc
