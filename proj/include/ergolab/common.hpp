#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace ergolab {

/// Canonical reduction of a real number into [0,1). Every piece of circle
/// arithmetic in the library funnels through this one function so that values
/// like 1.0 - ulp or tiny negatives cannot leak out as 1.0.
inline double wrap01(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;
  if (y < 0.0) y = 0.0;
  return y;
}

/// Arc-length distance on the circle of circumference 1.
inline double circle_distance(double a, double b) {
  double d = std::fabs(a - b);
  return d <= 0.5 ? d : 1.0 - d;
}

/// 0 * log 0 := 0 convention used by every entropy sum.
inline double xlogx(double m) {
  return m > 0.0 ? m * std::log(m) : 0.0;
}

}  // namespace ergolab
