#pragma once

#include <cmath>
#include <numbers>

#include "rfsim/integrator.hpp"

namespace rfsim::testing {

/// Damped cosine sampled on a uniform grid:
///   x(t) = base + amp * exp(-pi f t / Q) * cos(2 pi f t + phase)
/// on both channels (U carries a different baseline).
inline Trace damped_cosine(double f, double Q, double base, double amp, double duration,
                           double dt, double phase = 0.0) {
  Trace tr;
  const double decay = std::isinf(Q) ? 0.0 : std::numbers::pi * f / Q;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  tr.samples.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double x = amp * std::exp(-decay * t) * std::cos(2.0 * std::numbers::pi * f * t + phase);
    tr.samples.push_back({t, base - 0.035 + x, base + x, 0.0, false, false});
  }
  return tr;
}

inline Trace constant_trace(double u, double v, double duration, double dt) {
  Trace tr;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  for (std::size_t i = 0; i <= n; ++i)
    tr.samples.push_back({static_cast<double>(i) * dt, u, v, 0.0, false, false});
  return tr;
}

}  // namespace rfsim::testing
