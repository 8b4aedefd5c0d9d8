#pragma once

// Monte-Carlo driver: random geometries, per-trial solve plus comparators, RMSE aggregation.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rssloc/baselines.hpp"
#include "rssloc/errors.hpp"
#include "rssloc/geometry.hpp"
#include "rssloc/measurement_model.hpp"
#include "rssloc/obl_saa.hpp"
#include "rssloc/random.hpp"

namespace rssloc {

struct Comparators {
  bool lls = false;
  bool grid_oracle = false;
  bool crlb = false;

  friend constexpr bool operator==(const Comparators&, const Comparators&) = default;
};

/// One point of a sweep: the anchor count and noise level every trial uses.
struct TrialSetting {
  std::size_t n_anchors = 10;
  double sigma = 2.0;
};

struct ExperimentSpec {
  Bounds area;
  std::vector<std::size_t> n_anchors{10};
  std::vector<double> sigma{2.0};
  PathLossParams params;  // sigma is taken from the setting
  std::size_t trials = 2000;
  std::uint64_t master_seed = 42;
  SaaConfig solver;
  GridSpec grid;
  Comparators comparators;
  unsigned threads = 1;

  void validate() const {
    area.validate();
    params.validate();
    solver.validate();
    grid.validate();
    if (trials < 1) throw ValidationError("experiment: trials must be >= 1");
    if (n_anchors.empty() || sigma.empty()) throw ValidationError("experiment: n_anchors and sigma need a value");
    if (n_anchors.size() > 1 && sigma.size() > 1) {
      throw ValidationError("experiment: only one of n_anchors and sigma may be swept");
    }
    for (std::size_t n : n_anchors) {
      if (n < 1) throw ValidationError("experiment: n_anchors must be >= 1");
    }
    for (double s : sigma) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("experiment: sigma must be >= 0");
    }
  }

  /// "n" when the anchor count is swept, "sigma" otherwise.
  std::string axis_name() const { return n_anchors.size() > 1 ? "n" : "sigma"; }

  std::vector<TrialSetting> settings() const {
    std::vector<TrialSetting> out;
    for (std::size_t n : n_anchors) {
      for (double s : sigma) out.push_back({n, s});
    }
    return out;
  }

  double axis_value(const TrialSetting& s) const {
    return n_anchors.size() > 1 ? static_cast<double>(s.n_anchors) : s.sigma;
  }
};

struct TrialRecord {
  std::size_t trial_index = 0;
  Position truth;
  Position estimate;
  double error = 0.0;
  double cost = 0.0;
  Branch winning_branch = Branch::Original;
  double original_cost = 0.0;
  double opposing_cost = 0.0;
  std::optional<double> lls_error;
  std::optional<double> oracle_error;
  std::optional<double> oracle_cost;
  std::optional<double> crlb;
  double runtime = 0.0;  // seconds, localize only
  double lls_runtime = 0.0;
  double oracle_runtime = 0.0;
};

class TrialError : public Error {
 public:
  TrialError(const TrialSetting& setting, std::size_t trial_index, const std::string& what)
      : Error("trial " + std::to_string(trial_index) + " (n=" + std::to_string(setting.n_anchors) +
              ", sigma=" + std::to_string(setting.sigma) + "): " + what),
        setting_(setting),
        trial_index_(trial_index) {}

  const TrialSetting& setting() const noexcept { return setting_; }
  std::size_t trial_index() const noexcept { return trial_index_; }

 private:
  TrialSetting setting_;
  std::size_t trial_index_;
};

inline constexpr double kMinAnchorTargetSeparation = 0.1;
inline constexpr int kMaxPlacementAttempts = 1000;

/// Seed of a trial. Solver knobs are not part of it, so configurations compared at the
/// same (N, sigma) see the same geometries and noise.
inline std::uint64_t trial_seed(std::uint64_t master_seed, const TrialSetting& setting, std::size_t trial_index) {
  return derive_seed(master_seed, {setting.n_anchors, key_of(setting.sigma), trial_index});
}

struct TrialInstance {
  Scenario scenario;
  Position truth;
  MeasurementSet measurements;
  std::uint64_t solver_seed = 0;
};

/// Uniform anchors and target over the area, rejecting placements closer than 0.1 m.
template <std::uniform_random_bit_generator Urbg>
TrialInstance draw_instance(const ExperimentSpec& spec, const TrialSetting& setting, Urbg& rng) {
  TrialInstance inst;
  inst.scenario.params = spec.params;
  inst.scenario.params.sigma = setting.sigma;
  inst.scenario.bounds = spec.area;
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    inst.truth = random_initial(spec.area, rng);
    inst.scenario.anchors.clear();
    bool ok = true;
    for (std::size_t i = 0; i < setting.n_anchors; ++i) {
      const Position a = random_initial(spec.area, rng);
      if (distance(a, inst.truth) < kMinAnchorTargetSeparation) ok = false;
      for (const Position& other : inst.scenario.anchors) {
        if (other == a) ok = false;
      }
      inst.scenario.anchors.push_back(a);
    }
    if (ok) {
      inst.measurements = generate_measurements(inst.scenario, inst.truth, rng);
      inst.solver_seed = rng();
      return inst;
    }
  }
  throw Error("placement rejected " + std::to_string(kMaxPlacementAttempts) + " times");
}

inline TrialInstance make_instance(const ExperimentSpec& spec, const TrialSetting& setting, std::size_t trial_index) {
  Stream rng(trial_seed(spec.master_seed, setting, trial_index));
  return draw_instance(spec, setting, rng);
}

inline TrialRecord run_trial(const ExperimentSpec& spec, const TrialSetting& setting, std::size_t trial_index) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };

  try {
    const TrialInstance inst = make_instance(spec, setting, trial_index);
    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.truth = inst.truth;

    Stream solver_rng(derive_seed(inst.solver_seed, {spec.solver.seed}));
    const auto t0 = clock::now();
    const SolveReport report = localize(inst.scenario, inst.measurements, spec.solver, solver_rng);
    rec.runtime = seconds(clock::now() - t0);

    rec.estimate = report.estimate;
    rec.error = distance(report.estimate, inst.truth);
    rec.cost = report.cost;
    rec.winning_branch = report.winning_branch;
    rec.original_cost = report.original_cost;
    rec.opposing_cost = report.opposing_cost;

    if (spec.comparators.lls) {
      const auto t = clock::now();
      const Position p = lls_estimate(inst.scenario, inst.measurements);
      rec.lls_runtime = seconds(clock::now() - t);
      rec.lls_error = distance(p, inst.truth);
    }
    if (spec.comparators.grid_oracle) {
      const auto t = clock::now();
      const OracleResult o = grid_oracle(inst.scenario, inst.measurements, spec.grid);
      rec.oracle_runtime = seconds(clock::now() - t);
      rec.oracle_error = distance(o.best, inst.truth);
      rec.oracle_cost = o.cost;
    }
    if (spec.comparators.crlb && setting.sigma > 0.0) rec.crlb = crlb_rmse(inst.scenario, inst.truth);
    return rec;
  } catch (const TrialError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrialError(setting, trial_index, e.what());
  }
}

inline double rmse(std::span<const double> errors) {
  if (errors.empty()) throw EmptyAggregateError("rmse: no errors to aggregate");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

/// Runs every trial of one setting on `spec.threads` workers. Records come back in
/// trial-index order whatever the scheduling. On failure the lowest failing index is rethrown.
inline std::vector<TrialRecord> run_trials(const ExperimentSpec& spec, const TrialSetting& setting) {
  std::vector<TrialRecord> records(spec.trials);
  const unsigned workers = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(spec.trials)));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::optional<std::size_t> failed_index;
  std::exception_ptr failure;

  auto work = [&] {
    for (std::size_t i = next++; i < spec.trials; i = next++) {
      try {
        records[i] = run_trial(spec, setting, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failed_index || i < *failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

struct MethodSummary {
  std::string method;
  double rmse = 0.0;
  double mean_runtime = 0.0;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct SweepResult {
  std::string setting_name;
  double setting_value = 0.0;
  std::size_t trials = 0;
  std::vector<MethodSummary> methods;  // "obl_saa" first, then enabled comparators
  std::optional<double> mean_crlb;
  std::size_t opposing_wins = 0;  // trials where the opposing branch was strictly better

  friend bool operator==(const SweepResult&, const SweepResult&) = default;

  const MethodSummary* method(const std::string& name) const {
    for (const auto& m : methods) {
      if (m.method == name) return &m;
    }
    return nullptr;
  }
};

inline constexpr const char* kMethodOblSaa = "obl_saa";
inline constexpr const char* kMethodLls = "lls";
inline constexpr const char* kMethodGridOracle = "grid_oracle";

/// Aggregates records in index order.
inline SweepResult summarize(std::span<const TrialRecord> records, std::string setting_name, double setting_value) {
  if (records.empty()) throw EmptyAggregateError("summarize: no trial records");
  SweepResult r;
  r.setting_name = std::move(setting_name);
  r.setting_value = setting_value;
  r.trials = records.size();

  std::vector<double> err, lls, oracle;
  double rt = 0.0, lls_rt = 0.0, oracle_rt = 0.0, crlb_sum = 0.0;
  std::size_t crlb_count = 0;
  for (const TrialRecord& t : records) {
    err.push_back(t.error);
    rt += t.runtime;
    if (t.lls_error) {
      lls.push_back(*t.lls_error);
      lls_rt += t.lls_runtime;
    }
    if (t.oracle_error) {
      oracle.push_back(*t.oracle_error);
      oracle_rt += t.oracle_runtime;
    }
    if (t.crlb) {
      crlb_sum += *t.crlb;
      ++crlb_count;
    }
    if (t.winning_branch == Branch::Opposing) ++r.opposing_wins;
  }
  const double n = static_cast<double>(records.size());
  r.methods.push_back({kMethodOblSaa, rmse(err), rt / n});
  if (!lls.empty()) r.methods.push_back({kMethodLls, rmse(lls), lls_rt / static_cast<double>(lls.size())});
  if (!oracle.empty()) {
    r.methods.push_back({kMethodGridOracle, rmse(oracle), oracle_rt / static_cast<double>(oracle.size())});
  }
  if (crlb_count > 0) r.mean_crlb = crlb_sum / static_cast<double>(crlb_count);
  return r;
}

/// One SweepResult per setting, in setting order. `records`, if non-null, receives the trials of every setting.
inline std::vector<SweepResult> run_sweep(const ExperimentSpec& spec,
                                          std::vector<std::vector<TrialRecord>>* records = nullptr) {
  spec.validate();
  std::vector<SweepResult> out;
  for (const TrialSetting& s : spec.settings()) {
    auto trials = run_trials(spec, s);
    out.push_back(summarize(trials, spec.axis_name(), spec.axis_value(s)));
    if (records) records->push_back(std::move(trials));
  }
  return out;
}

// Solver parameter studies at N = 10, sigma = 2 dB around eps = 0.9, lambda = 0.4, n_max = 500.

enum class TuneParameter { Epsilon, Lambda, NMax };

inline const char* to_string(TuneParameter p) {
  switch (p) {
    case TuneParameter::Epsilon: return "epsilon";
    case TuneParameter::Lambda: return "lambda";
    case TuneParameter::NMax: return "n_max";
  }
  return "";
}

inline std::vector<double> tune_grid(TuneParameter p) {
  switch (p) {
    case TuneParameter::Epsilon: return {0.2, 0.4, 0.6, 0.8, 0.9, 0.95};
    case TuneParameter::Lambda: return {0.2, 0.3, 0.4, 0.5, 0.6, 0.8};
    case TuneParameter::NMax: return {200, 300, 400, 500, 600, 800};
  }
  return {};
}

inline SaaConfig with_parameter(SaaConfig c, TuneParameter p, double value) {
  switch (p) {
    case TuneParameter::Epsilon: c.epsilon = value; break;
    case TuneParameter::Lambda: c.lambda = value; break;
    case TuneParameter::NMax: c.n_max = static_cast<std::uint32_t>(value); break;
  }
  return c;
}

/// Sweeps one solver parameter over `values` (default: its standard grid), everything else
/// fixed by `base`. Every value runs on the same trial instances.
inline std::vector<SweepResult> run_tuning(const ExperimentSpec& base, TuneParameter p,
                                           std::vector<double> values = {}) {
  if (values.empty()) values = tune_grid(p);
  std::vector<SweepResult> out;
  for (double v : values) {
    ExperimentSpec spec = base;
    spec.solver = with_parameter(base.solver, p, v);
    spec.validate();
    if (spec.settings().size() != 1) throw ValidationError("tuning: base spec must have a single setting");
    const auto trials = run_trials(spec, spec.settings().front());
    out.push_back(summarize(trials, to_string(p), v));
  }
  return out;
}

}  // namespace rssloc
