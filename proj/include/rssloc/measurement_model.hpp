#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rssloc/errors.hpp"
#include "rssloc/geometry.hpp"
#include "rssloc/random.hpp"

namespace rssloc {

/// Log-distance path loss model: P = p0 - 10 gamma log10(d / d0) + n, n ~ N(0, sigma^2), all in dB.
struct PathLossParams {
  double p0 = 10.0;
  double gamma = 3.0;
  double d0 = 1.0;
  double sigma = 2.0;

  friend constexpr bool operator==(const PathLossParams&, const PathLossParams&) = default;

  void validate() const {
    if (!std::isfinite(p0)) throw ValidationError("params: p0 must be finite");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("params: gamma must be > 0");
    if (!(d0 > 0.0) || !std::isfinite(d0)) throw ValidationError("params: d0 must be > 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("params: sigma must be >= 0");
  }
};

struct Scenario {
  std::vector<Position> anchors;
  PathLossParams params;
  Bounds bounds;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  std::size_t size() const { return anchors.size(); }

  void validate() const {
    params.validate();
    bounds.validate();
    if (anchors.empty()) throw ValidationError("scenario: at least one anchor is required");
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      if (!anchors[i].finite()) throw ValidationError("scenario: anchor " + std::to_string(i) + " is not finite");
      if (!bounds.contains(anchors[i])) {
        throw ValidationError("scenario: anchor " + std::to_string(i) + " lies outside the bounds");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (anchors[i] == anchors[j]) {
          throw ValidationError("scenario: anchors " + std::to_string(j) + " and " + std::to_string(i) +
                                " coincide");
        }
      }
    }
  }
};

/// RSS readings in dB, index-aligned with Scenario::anchors.
struct MeasurementSet {
  std::vector<double> p;

  friend bool operator==(const MeasurementSet&, const MeasurementSet&) = default;

  std::size_t size() const { return p.size(); }

  void validate_against(const Scenario& scenario) const {
    if (p.size() != scenario.size()) {
      throw ValidationError("measurements: expected " + std::to_string(scenario.size()) + " values, got " +
                            std::to_string(p.size()));
    }
    for (double v : p) {
      if (!std::isfinite(v)) throw ValidationError("measurements: all values must be finite");
    }
  }
};

/// Smallest anchor distance ml_cost will take a logarithm of.
inline constexpr double kMinCostDistance = 1e-6;

/// Noise-free received power at `target` from `anchor`.
inline double expected_rss(const PathLossParams& params, Position anchor, Position target) {
  const double d = distance(target, anchor);
  if (!(d > 0.0)) throw SingularGeometryError("expected_rss: target coincides with anchor");
  return params.p0 - 10.0 * params.gamma * std::log10(d / params.d0);
}

/// Draws one Gaussian per anchor, in anchor order.
template <std::uniform_random_bit_generator Urbg>
MeasurementSet generate_measurements(const Scenario& scenario, Position target, Urbg& rng) {
  MeasurementSet out;
  out.p.reserve(scenario.size());
  for (const Position& a : scenario.anchors) {
    const double mean = expected_rss(scenario.params, a, target);
    out.p.push_back(mean + scenario.params.sigma * standard_normal(rng));
  }
  return out;
}

/// Unweighted ML cost: sum_i (P_i - P0 + 10 gamma log10(||x - a_i|| / d0))^2.
/// Distances below kMinCostDistance are clamped so any point can be evaluated.
inline double ml_cost(Position x, std::span<const Position> anchors, std::span<const double> p,
                      const PathLossParams& params) {
  const double slope = 10.0 * params.gamma;
  double sum = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double d = std::max(distance(x, anchors[i]), kMinCostDistance);
    const double r = p[i] - params.p0 + slope * std::log10(d / params.d0);
    sum += r * r;
  }
  return sum;
}

inline double ml_cost(Position x, const Scenario& scenario, const MeasurementSet& meas) {
  return ml_cost(x, scenario.anchors, meas.p, scenario.params);
}

/// Zero-noise inversion of the path loss model.
inline double range_estimate(double p_i, const PathLossParams& params) {
  return params.d0 * std::pow(10.0, (params.p0 - p_i) / (10.0 * params.gamma));
}

}  // namespace rssloc
