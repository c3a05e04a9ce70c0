#pragma once

#include <algorithm>
#include <cmath>

namespace jsp {

// Entropy penalty eta*log(eta) + (1-eta)*log(1-eta): zero exactly at 0 and
// 1, most negative at 1/2, so subtracting it (or adding its tangent with a
// positive multiplier) drives relaxed scheduling variables to binary.

inline double entropy_penalty(double eta) {
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  return xlogx(eta) + xlogx(1.0 - eta);
}

/// Gradient log(eta/(1-eta)), evaluated on eta clamped to
/// [1e-8, 1-1e-8] so the endpoints stay finite.
inline double entropy_penalty_grad(double eta) {
  const double e = std::clamp(eta, 1e-8, 1.0 - 1e-8);
  return std::log(e / (1.0 - e));
}

}  // namespace jsp
