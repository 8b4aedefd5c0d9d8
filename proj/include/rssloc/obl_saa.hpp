#pragma once

// Simulated annealing from a random start and its opposition-based mirror image.
// Both anneals run independently; the lower final cost wins.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rssloc/errors.hpp"
#include "rssloc/geometry.hpp"
#include "rssloc/measurement_model.hpp"
#include "rssloc/random.hpp"

namespace rssloc {

/// Initial-temperature rule.
struct TemperaturePolicy {
  enum class Kind { CostScaled, Fixed };

  Kind kind = Kind::CostScaled;
  double value = 1.0;  // used by Fixed only

  static constexpr TemperaturePolicy cost_scaled() { return {Kind::CostScaled, 1.0}; }
  static constexpr TemperaturePolicy fixed(double t0) { return {Kind::Fixed, t0}; }

  friend constexpr bool operator==(const TemperaturePolicy&, const TemperaturePolicy&) = default;

  /// CostScaled: T0 = max(f(x0), 1).
  double initial(double initial_cost) const {
    return kind == Kind::Fixed ? value : std::max(initial_cost, 1.0);
  }
};

/// Annealing knobs. Every iteration is one cooling: T <- epsilon T and step <- lambda step.
/// The step starts at the full extent of the bounds and is reset to it once it drops below
/// min_step_ratio times the extent, so coarse global moves recur throughout the run.
struct SaaConfig {
  double epsilon = 0.9;  // temperature ratio per cooling
  double lambda = 0.4;   // step ratio per cooling
  std::uint32_t n_max = 500;
  double k = 1.0;  // Boltzmann constant
  TemperaturePolicy t0_policy = TemperaturePolicy::cost_scaled();
  std::uint64_t seed = 42;
  double min_step_ratio = 1e-6;

  friend constexpr bool operator==(const SaaConfig&, const SaaConfig&) = default;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("config: epsilon must lie in (0, 1)");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ValidationError("config: lambda must lie in (0, 1]");
    if (n_max < 1) throw ValidationError("config: n_max must be >= 1");
    if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("config: k must be > 0");
    if (t0_policy.kind == TemperaturePolicy::Kind::Fixed &&
        (!(t0_policy.value > 0.0) || !std::isfinite(t0_policy.value))) {
      throw ValidationError("config: fixed initial temperature must be > 0");
    }
    if (!(min_step_ratio > 0.0 && min_step_ratio < 1.0)) {
      throw ValidationError("config: min_step_ratio must lie in (0, 1)");
    }
  }
};

enum class Branch { Original, Opposing };

inline const char* to_string(Branch b) { return b == Branch::Original ? "original" : "opposing"; }

/// Uniform start inside the bounds: r (.) (max - min) + min.
constexpr Position scale_into(Position r, const Bounds& bounds) {
  return hadamard(r, bounds.extent()) + bounds.min;
}

template <std::uniform_random_bit_generator Urbg>
Position random_initial(const Bounds& bounds, Urbg& rng) {
  const double r1 = uniform01(rng);
  const double r2 = uniform01(rng);
  return scale_into({r1, r2}, bounds);
}

/// Opposition-based counterpart: max + min - x.
constexpr Position oppose(Position x, const Bounds& bounds) { return bounds.max + bounds.min - x; }

/// Metropolis criterion.
inline double acceptance_probability(double delta, double temperature, double k) {
  if (delta <= 0.0) return 1.0;
  // Floored so the probability stays positive where exp underflows.
  return std::max(std::exp(-delta / (k * temperature)), std::numeric_limits<double>::denorm_min());
}

/// x + u (.) step, clamped to the bounds; u in [-1, 1]^2.
constexpr Position displace(Position x, Position step, Position u, const Bounds& bounds) {
  return bounds.clamp(x + hadamard(u, step));
}

template <std::uniform_random_bit_generator Urbg>
Position propose_neighbor(Position x, Position step, const Bounds& bounds, Urbg& rng) {
  const double u1 = uniform_signed(rng);
  const double u2 = uniform_signed(rng);
  return displace(x, step, {u1, u2}, bounds);
}

struct AnnealState {
  Position current;
  double current_cost = 0.0;
  Position best;
  double best_cost = 0.0;
  double temperature = 1.0;
  double step_ratio = 1.0;  // step / extent
  Position step;
  std::uint32_t iteration = 0;
};

/// Next step ratio: shrink by lambda, wrap back to 1 below the floor.
constexpr double next_step_ratio(double ratio, double lambda, double min_ratio) {
  const double next = ratio * lambda;
  return next < min_ratio ? 1.0 : next;
}

struct TraceRow {
  Branch branch = Branch::Original;
  std::uint32_t iteration = 0;
  Position position;
  double cost = 0.0;
  double temperature = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// One annealing chain over the ML cost of a fixed scenario.
class Annealer {
 public:
  Annealer(const Scenario& scenario, const MeasurementSet& meas, const SaaConfig& config)
      : scenario_(scenario), meas_(meas), config_(config) {}

  double cost(Position x) const { return ml_cost(x, scenario_, meas_); }

  AnnealState start(Position x0) const {
    AnnealState s;
    s.current = s.best = x0;
    s.current_cost = s.best_cost = cost(x0);
    s.temperature = config_.t0_policy.initial(s.current_cost);
    s.step_ratio = 1.0;
    s.step = scenario_.bounds.extent();
    return s;
  }

  /// Propose, apply the Metropolis test, track the best point, cool.
  template <std::uniform_random_bit_generator Urbg>
  void step(AnnealState& s, Urbg& rng) const {
    const Position candidate = propose_neighbor(s.current, s.step, scenario_.bounds, rng);
    const double candidate_cost = cost(candidate);
    const double delta = candidate_cost - s.current_cost;
    bool accept = delta <= 0.0;
    if (!accept) accept = uniform01(rng) < acceptance_probability(delta, s.temperature, config_.k);
    if (accept) {
      s.current = candidate;
      s.current_cost = candidate_cost;
      if (candidate_cost < s.best_cost) {
        s.best = candidate;
        s.best_cost = candidate_cost;
      }
    }
    // Floor to stay strictly positive once eps^j underflows.
    s.temperature = std::max(s.temperature * config_.epsilon, std::numeric_limits<double>::min());
    s.step_ratio = next_step_ratio(s.step_ratio, config_.lambda, config_.min_step_ratio);
    s.step = s.step_ratio * scenario_.bounds.extent();
    ++s.iteration;
  }

 private:
  const Scenario& scenario_;
  const MeasurementSet& meas_;
  const SaaConfig& config_;
};

struct AnnealResult {
  Position best;
  double cost = 0.0;
};

/// Runs n_max iterations from x0 and returns the best point visited. When `trace`
/// is non-null, the current point is logged once at start and after every iteration.
template <std::uniform_random_bit_generator Urbg>
AnnealResult anneal(Position x0, const Scenario& scenario, const MeasurementSet& meas, const SaaConfig& config,
                    Urbg& rng, std::vector<TraceRow>* trace = nullptr, Branch branch = Branch::Original) {
  const Annealer annealer(scenario, meas, config);
  AnnealState s = annealer.start(x0);
  auto log = [&] {
    if (trace) trace->push_back({branch, s.iteration, s.current, s.current_cost, s.temperature});
  };
  log();
  for (std::uint32_t j = 0; j < config.n_max; ++j) {
    annealer.step(s, rng);
    log();
  }
  return {s.best, s.best_cost};
}

struct SolveReport {
  Position estimate;
  double cost = 0.0;
  Branch winning_branch = Branch::Original;
  double original_cost = 0.0;
  double opposing_cost = 0.0;
  Position original_estimate;
  Position opposing_estimate;
  Position original_start;
  Position opposing_start;
  std::optional<std::vector<TraceRow>> trace;

  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

/// Lower cost wins; exact ties go to the original branch.
inline SolveReport select_branch(const AnnealResult& original, const AnnealResult& opposing) {
  SolveReport r;
  r.original_cost = original.cost;
  r.opposing_cost = opposing.cost;
  r.original_estimate = original.best;
  r.opposing_estimate = opposing.best;
  const bool opposing_wins = opposing.cost < original.cost;
  r.winning_branch = opposing_wins ? Branch::Opposing : Branch::Original;
  r.estimate = opposing_wins ? opposing.best : original.best;
  r.cost = opposing_wins ? opposing.cost : original.cost;
  return r;
}

struct LocalizeOptions {
  bool record_trace = false;
  bool concurrent_branches = false;
};

/// Sub-stream seed for one branch; identical whether branches run in sequence or in parallel.
constexpr std::uint64_t branch_seed(std::uint64_t base, Branch b) {
  return derive_seed(base, {b == Branch::Original ? 0u : 1u});
}

/// Draws a random start from `rng`, forms its opposite, anneals both and keeps the better.
/// `rng` supplies the start and one base seed; each branch then runs on its own sub-stream.
template <std::uniform_random_bit_generator Urbg>
SolveReport localize(const Scenario& scenario, const MeasurementSet& meas, const SaaConfig& config, Urbg& rng,
                     const LocalizeOptions& options = {}) {
  config.validate();
  meas.validate_against(scenario);

  const Position x_orig = random_initial(scenario.bounds, rng);
  const Position x_opp = oppose(x_orig, scenario.bounds);
  const std::uint64_t base = rng();

  std::vector<TraceRow> trace_orig;
  std::vector<TraceRow> trace_opp;
  auto run = [&](Position x0, Branch b, std::vector<TraceRow>& trace) {
    Stream sub(branch_seed(base, b));
    return anneal(x0, scenario, meas, config, sub, options.record_trace ? &trace : nullptr, b);
  };

  AnnealResult r_orig;
  AnnealResult r_opp;
  if (options.concurrent_branches) {
    std::thread worker([&] { r_opp = run(x_opp, Branch::Opposing, trace_opp); });
    r_orig = run(x_orig, Branch::Original, trace_orig);
    worker.join();
  } else {
    r_orig = run(x_orig, Branch::Original, trace_orig);
    r_opp = run(x_opp, Branch::Opposing, trace_opp);
  }

  SolveReport report = select_branch(r_orig, r_opp);
  report.original_start = x_orig;
  report.opposing_start = x_opp;
  if (options.record_trace) {
    trace_orig.insert(trace_orig.end(), trace_opp.begin(), trace_opp.end());
    report.trace = std::move(trace_orig);
  }
  return report;
}

/// Seeds the stream from config.seed.
inline SolveReport localize(const Scenario& scenario, const MeasurementSet& meas, const SaaConfig& config,
                            const LocalizeOptions& options = {}) {
  Stream rng(config.seed);
  return localize(scenario, meas, config, rng, options);
}

}  // namespace rssloc
