#pragma once

#include <algorithm>
#include <cmath>

#include "fluxswarm/core/vec2.hpp"

namespace fluxswarm::env {

/// Progress reward for an agent now at x_t that moved dx_up upstream
/// (x_{t-1} - x_t) during the step.
inline double reward_progress(double x_t, double dx_up, double x_success, double x_failure) {
  if (x_t < x_success) return 10.0;
  if (x_t > x_failure) return -10.0;
  const double delta = dx_up / (x_failure - x_success);
  if (dx_up >= 0.0) return 100.0 * delta - 0.01;
  return 100.0 * std::tanh(3.0 * delta) / std::tanh(3.0) - 0.01;
}

/// Work done by the propulsive force along the displacement, relative to
/// f_max times the distance travelled. Diagonal thrust can reach sqrt(2) f_max
/// under the per-component cap, so the ratio is saturated to [-1, 1].
inline double reward_energy(Vec2 force, Vec2 displacement, double f_max) {
  const double len = norm(displacement);
  if (len < 1e-12 || !(f_max > 0.0)) return 0.0;
  return std::clamp(dot(force, displacement) / (f_max * len), -1.0, 1.0);
}

/// Cosine similarity between consecutive actions.
inline double reward_smooth(Vec2 a_t, Vec2 a_prev) {
  const double na = norm(a_t);
  const double nb = norm(a_prev);
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return dot(a_t, a_prev) / (na * nb);
}

}  // namespace fluxswarm::env
