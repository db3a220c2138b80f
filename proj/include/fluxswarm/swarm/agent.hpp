#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fluxswarm/core/errors.hpp"
#include "fluxswarm/core/vec2.hpp"

namespace fluxswarm::swarm {

/// Kinematic state of one rigid disk-shaped micro-robot.
struct AgentState {
  int id = 0;
  Vec2 pos;          // m
  Vec2 vel;          // m/s
  double radius = 0.0;
  double mass = 0.0;  // kg
  Vec2 prev_action;  // normalized, as executed on the previous step

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

inline double agent_mass(double radius, double rho_solid) {
  return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius * rho_solid;
}

struct SwarmConfig {
  int rows = 2;
  int cols = 8;
  double spacing = 1.0e-3;   // m, both directions
  double radius = 2.5e-4;    // m
  double rho_solid = 15120.0;
  double f_max = 8.5e-7;     // N, per action component
  double center_x = 0.05;    // m, lattice centre along the channel

  int n_agents() const { return rows * cols; }

  /// Checks the lattice against a channel of the given extents.
  void validate(double length, double width) const {
    if (rows < 1 || cols < 1) throw ValidationError("swarm: rows and cols must be >= 1");
    if (!(radius > 0.0)) throw ValidationError("swarm: radius must be positive");
    if (!(rho_solid > 0.0)) throw ValidationError("swarm: rho_solid must be positive");
    if (!(f_max >= 0.0)) throw ValidationError("swarm: f_max must be non-negative");
    if (rows * cols > 1 && !(spacing >= 2.0 * radius)) {
      throw ValidationError("swarm: lattice spacing smaller than an agent diameter");
    }
    const double half_h = 0.5 * (rows - 1) * spacing;
    const double half_w = 0.5 * (cols - 1) * spacing;
    const double slack = 1e-9 * width;
    if (0.5 * width - half_h < 2.0 * radius - slack) {
      throw ValidationError("swarm: lattice does not fit across the channel with one-radius wall clearance");
    }
    if (center_x - half_w < radius || center_x + half_w > length - radius) {
      throw ValidationError("swarm: lattice does not fit along the channel");
    }
  }
};

/// Agents at rest on a rows × cols lattice centred at (center_x, width / 2).
/// Ids run column-major from upstream to downstream, bottom row first.
inline std::vector<AgentState> make_lattice(const SwarmConfig& cfg, double width) {
  std::vector<AgentState> agents;
  agents.reserve(static_cast<std::size_t>(cfg.n_agents()));
  const double m = agent_mass(cfg.radius, cfg.rho_solid);
  for (int c = 0; c < cfg.cols; ++c) {
    for (int r = 0; r < cfg.rows; ++r) {
      AgentState a;
      a.id = static_cast<int>(agents.size());
      a.pos = {cfg.center_x + (c - 0.5 * (cfg.cols - 1)) * cfg.spacing,
               0.5 * width + (r - 0.5 * (cfg.rows - 1)) * cfg.spacing};
      a.radius = cfg.radius;
      a.mass = m;
      agents.push_back(a);
    }
  }
  return agents;
}

inline Vec2 mean_position(const std::vector<AgentState>& agents) {
  Vec2 s;
  for (const auto& a : agents) s += a.pos;
  return agents.empty() ? s : s / static_cast<double>(agents.size());
}

/// Semi-implicit Euler: velocity first, then position with the new velocity.
inline AgentState integrate_agent(AgentState agent, Vec2 force, double dt) {
  agent.vel += force * (dt / agent.mass);
  agent.pos += agent.vel * dt;
  return agent;
}

}  // namespace fluxswarm::swarm
