#pragma once

#include <cmath>
#include <numbers>

namespace q8 {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Representative in [0, 2π).
inline double wrap_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

// Representative in (-π, π].
inline double wrap_pm_pi(double x) {
  double r = wrap_2pi(x);
  if (r > kPi) r -= kTwoPi;
  return r;
}

inline double circular_distance(double x, double y) {
  return std::abs(wrap_pm_pi(x - y));
}

}  // namespace q8
