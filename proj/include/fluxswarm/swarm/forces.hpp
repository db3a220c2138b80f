#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "fluxswarm/flow/grid.hpp"
#include "fluxswarm/flow/sampling.hpp"
#include "fluxswarm/swarm/agent.hpp"

namespace fluxswarm::swarm {

/// Point k of n equispaced points on the agent rim, starting at angle 0.
inline Vec2 rim_point(const AgentState& a, int k, int n) {
  const double th = 2.0 * std::numbers::pi * k / n;
  return {a.pos.x + a.radius * std::cos(th), a.pos.y + a.radius * std::sin(th)};
}

/// Out-of-plane extent used to turn per-unit-depth 2D fluid forces into
/// newtons acting on a disk of radius r: the sphere diameter 2r.
inline double effective_depth(double radius) { return 2.0 * radius; }

/// Pressure force per unit depth (N/m) from 8 rim samples, each weighted by
/// its arc length πr/4. Opposite samples are differenced first so a uniform
/// field cancels exactly.
inline Vec2 hydrodynamic_force(const flow::PressureField& p, const flow::GridSpec& g, const AgentState& a) {
  constexpr double s = std::numbers::sqrt2 / 2.0;
  constexpr double kCos[4] = {1.0, s, 0.0, -s};
  constexpr double kSin[4] = {0.0, s, 1.0, s};
  const double w = std::numbers::pi * a.radius / 4.0;
  auto sample = [&](double c, double sn) {
    return flow::sample_pressure(p, g, flow::clamp_to_domain(g, {a.pos.x + a.radius * c, a.pos.y + a.radius * sn}));
  };
  Vec2 f;
  for (int k = 0; k < 4; ++k) {
    const double dp = sample(kCos[k], kSin[k]) - sample(-kCos[k], -kSin[k]);
    f.x -= w * dp * kCos[k];
    f.y -= w * dp * kSin[k];
  }
  return f;
}

inline double drag_coefficient(double re) {
  if (re >= 1000.0) return 0.44;
  if (re < 0.1) return 24.0 / re;
  return 24.0 / re * (1.0 + 0.15 * std::pow(re, 0.687));
}

/// Mean fluid velocity over the 8 rim points.
inline Vec2 ambient_velocity(const flow::StaggeredVelocityField& vel, const flow::GridSpec& g, const AgentState& a) {
  Vec2 s;
  for (int k = 0; k < 8; ++k) s += flow::sample_velocity(vel, g, flow::clamp_to_domain(g, rim_point(a, k, 8)));
  return s / 8.0;
}

/// Quadratic drag per unit depth (N/m) with reference length A = 2r.
inline Vec2 drag_force_from_relative(Vec2 v_rel, double radius, const flow::FluidProps& fluid) {
  const double speed = norm(v_rel);
  if (speed < 1e-12) return {};
  const double d = 2.0 * radius;
  const double re = fluid.rho * speed * d / fluid.mu;
  const double mag = 0.5 * fluid.rho * d * drag_coefficient(re) * speed * speed;
  return v_rel * (mag / speed);
}

inline Vec2 drag_force(const flow::StaggeredVelocityField& vel, const flow::GridSpec& g, const AgentState& a,
                       const flow::FluidProps& fluid) {
  return drag_force_from_relative(ambient_velocity(vel, g, a) - a.vel, a.radius, fluid);
}

inline Vec2 clamp_action(Vec2 a) { return {std::clamp(a.x, -1.0, 1.0), std::clamp(a.y, -1.0, 1.0)}; }

/// Propulsive force (N): each action component clamped to [-1, 1] and scaled by f_max.
inline Vec2 internal_force(Vec2 action, double f_max) { return clamp_action(action) * f_max; }

inline double contact_slop(double radius) { return 0.05 * radius; }

/// Index pairs (i < j) whose centres are within 2r + slop.
inline std::vector<std::pair<int, int>> contact_pairs(const std::vector<AgentState>& agents) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(agents.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double reach = agents[i].radius + agents[j].radius + contact_slop(std::max(agents[i].radius, agents[j].radius));
      if (norm(agents[i].pos - agents[j].pos) <= reach) out.emplace_back(i, j);
    }
  }
  return out;
}

/// Propulsion transmitted to agent i by touching neighbours: the part of each
/// neighbour's force along the line of centres, when it pushes toward i.
inline Vec2 contact_force(int i, const std::vector<AgentState>& agents, const std::vector<Vec2>& actions, double f_max) {
  Vec2 f;
  const AgentState& ai = agents[static_cast<std::size_t>(i)];
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    const Vec2 d = ai.pos - agents[j].pos;
    const double dist = norm(d);
    const double reach = ai.radius + agents[j].radius + contact_slop(std::max(ai.radius, agents[j].radius));
    if (dist > reach || dist <= 0.0) continue;
    const Vec2 n = d / dist;
    const double push = dot(internal_force(actions[j], f_max), n);
    if (push >= 0.0) f += n * push;
  }
  return f;
}

/// Forces on one agent in newtons.
struct ForceBreakdown {
  Vec2 hydro;
  Vec2 drag;
  Vec2 internal;
  Vec2 contact;

  Vec2 total() const { return hydro + drag + internal + contact; }
  bool finite() const { return is_finite(hydro) && is_finite(drag) && is_finite(internal) && is_finite(contact); }
};

/// All four forces for every agent from the current fields and actions. The
/// 2D fluid forces are scaled by effective_depth().
inline std::vector<ForceBreakdown> compute_forces(const flow::FluidState& fluid_state, const flow::GridSpec& g,
                                                  const flow::FluidProps& fluid, const std::vector<AgentState>& agents,
                                                  const std::vector<Vec2>& actions, double f_max) {
  std::vector<ForceBreakdown> out(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentState& a = agents[i];
    const double depth = effective_depth(a.radius);
    out[i].hydro = hydrodynamic_force(fluid_state.pressure, g, a) * depth;
    out[i].drag = drag_force(fluid_state.vel, g, a, fluid) * depth;
    out[i].internal = internal_force(actions[i], f_max);
    out[i].contact = contact_force(static_cast<int>(i), agents, actions, f_max);
  }
  return out;
}

}  // namespace fluxswarm::swarm
