#pragma once

#include <algorithm>
#include <cmath>

#include "rssloc/errors.hpp"

namespace rssloc {

/// A point in the 2-D plane, meters.
struct Position {
  double x1 = 0.0;
  double x2 = 0.0;

  friend constexpr Position operator+(Position a, Position b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend constexpr Position operator-(Position a, Position b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend constexpr Position operator*(double s, Position a) { return {s * a.x1, s * a.x2}; }
  friend constexpr bool operator==(Position, Position) = default;

  bool finite() const { return std::isfinite(x1) && std::isfinite(x2); }
};

/// Component-wise (Hadamard) product.
constexpr Position hadamard(Position a, Position b) { return {a.x1 * b.x1, a.x2 * b.x2}; }

inline double norm(Position a) { return std::hypot(a.x1, a.x2); }
inline double distance(Position a, Position b) { return norm(a - b); }

/// Axis-aligned search region [min, max].
struct Bounds {
  Position min{0.0, 0.0};
  Position max{40.0, 40.0};

  friend constexpr bool operator==(const Bounds&, const Bounds&) = default;

  constexpr Position extent() const { return max - min; }

  constexpr bool contains(Position p) const {
    return p.x1 >= min.x1 && p.x1 <= max.x1 && p.x2 >= min.x2 && p.x2 <= max.x2;
  }

  constexpr Position clamp(Position p) const {
    return {std::clamp(p.x1, min.x1, max.x1), std::clamp(p.x2, min.x2, max.x2)};
  }

  void validate() const {
    if (!min.finite() || !max.finite() || !(min.x1 < max.x1) || !(min.x2 < max.x2)) {
      throw ValidationError("bounds: min must be strictly less than max component-wise");
    }
  }
};

}  // namespace rssloc
