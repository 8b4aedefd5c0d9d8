#pragma once

// Comparators for the annealing solver: an exhaustive lattice minimizer of the ML cost,
// squared-range linear least squares, and the Cramer-Rao bound.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "rssloc/errors.hpp"
#include "rssloc/geometry.hpp"
#include "rssloc/measurement_model.hpp"

namespace rssloc {

struct GridSpec {
  double resolution = 0.4;
  unsigned refine_levels = 2;

  void validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ValidationError("grid: resolution must be > 0");
  }
};

/// Lattice coordinates lo, lo + pitch, ... up to and including hi when it falls on the lattice.
inline std::vector<double> lattice_axis(double lo, double hi, double pitch) {
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / pitch * (1.0 + 1e-12))) + 1;
  std::vector<double> axis;
  axis.reserve(count);
  for (std::size_t k = 0; k < count; ++k) axis.push_back(lo + static_cast<double>(k) * pitch);
  return axis;
}

struct SurfacePoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double cost = 0.0;
};

/// ML cost on the lattice of the given pitch, rows of constant x2 in increasing order.
inline std::vector<SurfacePoint> cost_surface(const Scenario& scenario, const MeasurementSet& meas, double pitch) {
  if (!(pitch > 0.0) || !std::isfinite(pitch)) throw ValidationError("surface: pitch must be > 0");
  meas.validate_against(scenario);
  const auto xs = lattice_axis(scenario.bounds.min.x1, scenario.bounds.max.x1, pitch);
  const auto ys = lattice_axis(scenario.bounds.min.x2, scenario.bounds.max.x2, pitch);
  std::vector<SurfacePoint> out;
  out.reserve(xs.size() * ys.size());
  for (double y : ys) {
    for (double x : xs) out.push_back({x, y, ml_cost({x, y}, scenario, meas)});
  }
  return out;
}

struct OracleResult {
  Position best;
  double cost = 0.0;
  std::size_t evaluations = 0;
};

/// Coarse lattice scan over the bounds, then `refine_levels` rescans of the 3x3-cell
/// neighborhood of the incumbent at a tenth of the previous pitch. The first minimum
/// in row-major scan order wins, so the result is fully deterministic.
inline OracleResult grid_oracle(const Scenario& scenario, const MeasurementSet& meas, const GridSpec& grid = {}) {
  grid.validate();
  meas.validate_against(scenario);
  const Bounds& b = scenario.bounds;

  OracleResult r;
  r.cost = std::numeric_limits<double>::infinity();
  auto visit = [&](Position p) {
    const double c = ml_cost(p, scenario, meas);
    ++r.evaluations;
    if (c < r.cost) {
      r.cost = c;
      r.best = p;
    }
  };

  for (double y : lattice_axis(b.min.x2, b.max.x2, grid.resolution)) {
    for (double x : lattice_axis(b.min.x1, b.max.x1, grid.resolution)) visit({x, y});
  }

  double pitch = grid.resolution;
  for (unsigned level = 0; level < grid.refine_levels; ++level) {
    const double fine = pitch / 10.0;
    const Position center = r.best;
    // 3x3 cells of the old pitch span +-1.5 old pitches = +-15 fine steps.
    for (int j = -15; j <= 15; ++j) {
      for (int i = -15; i <= 15; ++i) {
        const Position p{center.x1 + i * fine, center.x2 + j * fine};
        if (b.contains(p)) visit(p);
      }
    }
    pitch = fine;
  }
  return r;
}

/// Squared-range linear least squares. Each reading is inverted to a range, the averaged
/// range equation is subtracted to cancel ||x||^2, and the N x 2 system is solved through
/// its normal equations. No clamping to the bounds.
inline Position lls_estimate(const Scenario& scenario, const MeasurementSet& meas) {
  meas.validate_against(scenario);
  const std::size_t n = scenario.size();
  if (n < 3) throw DegenerateGeometryError("lls_estimate: at least 3 anchors are required");

  Position mean_a{0.0, 0.0};
  double mean_a2 = 0.0;
  double mean_d2 = 0.0;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Position& a = scenario.anchors[i];
    const double d = range_estimate(meas.p[i], scenario.params);
    d2[i] = d * d;
    mean_a = mean_a + a;
    mean_a2 += a.x1 * a.x1 + a.x2 * a.x2;
    mean_d2 += d2[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  mean_a = inv_n * mean_a;
  mean_a2 *= inv_n;
  mean_d2 *= inv_n;

  // Rows: 2 (a_i - mean_a)^T x = ||a_i||^2 - mean ||a||^2 - d_i^2 + mean d^2
  double ata11 = 0.0, ata12 = 0.0, ata22 = 0.0, atb1 = 0.0, atb2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Position& a = scenario.anchors[i];
    const double r1 = 2.0 * (a.x1 - mean_a.x1);
    const double r2 = 2.0 * (a.x2 - mean_a.x2);
    const double rhs = (a.x1 * a.x1 + a.x2 * a.x2) - mean_a2 - d2[i] + mean_d2;
    ata11 += r1 * r1;
    ata12 += r1 * r2;
    ata22 += r2 * r2;
    atb1 += r1 * rhs;
    atb2 += r2 * rhs;
  }
  const double det = ata11 * ata22 - ata12 * ata12;
  const double scale = ata11 + ata22;
  if (!(det > 1e-12 * scale * scale)) throw DegenerateGeometryError("lls_estimate: anchors are collinear");
  return {(ata22 * atb1 - ata12 * atb2) / det, (ata11 * atb2 - ata12 * atb1) / det};
}

/// Symmetric 2x2 Fisher information matrix, 1/m^2.
struct FisherInfo {
  double m11 = 0.0;
  double m12 = 0.0;
  double m22 = 0.0;

  double trace() const { return m11 + m22; }
  double determinant() const { return m11 * m22 - m12 * m12; }

  /// Ascending eigenvalues.
  std::pair<double, double> eigenvalues() const {
    const double half_tr = 0.5 * trace();
    const double disc = std::sqrt(0.25 * (m11 - m22) * (m11 - m22) + m12 * m12);
    return {half_tr - disc, half_tr + disc};
  }
};

/// FIM = c^2 sum_i (x - a_i)(x - a_i)^T / ||x - a_i||^4 with c = 10 gamma / (sigma ln 10).
inline FisherInfo fisher_information(const Scenario& scenario, Position target) {
  const PathLossParams& prm = scenario.params;
  if (!(prm.sigma > 0.0)) throw UndefinedBoundError("fisher_information: sigma must be > 0");
  const double c = 10.0 * prm.gamma / (prm.sigma * std::numbers::ln10);
  FisherInfo f;
  for (const Position& a : scenario.anchors) {
    const Position v = target - a;
    const double d2 = v.x1 * v.x1 + v.x2 * v.x2;
    if (!(d2 > 0.0)) throw SingularGeometryError("fisher_information: target coincides with an anchor");
    const double w = 1.0 / (d2 * d2);
    f.m11 += w * v.x1 * v.x1;
    f.m12 += w * v.x1 * v.x2;
    f.m22 += w * v.x2 * v.x2;
  }
  const double c2 = c * c;
  f.m11 *= c2;
  f.m12 *= c2;
  f.m22 *= c2;
  return f;
}

/// sqrt(trace(FIM^-1)), meters.
inline double crlb_rmse(const FisherInfo& f) {
  const double det = f.determinant();
  const double tr = f.trace();
  if (!(det > 1e-12 * tr * tr)) throw DegenerateGeometryError("crlb_rmse: Fisher information is singular");
  return std::sqrt(tr / det);
}

inline double crlb_rmse(const Scenario& scenario, Position target) {
  return crlb_rmse(fisher_information(scenario, target));
}

}  // namespace rssloc
