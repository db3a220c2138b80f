#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fluxswarm/swarm/agent.hpp"

namespace fluxswarm::swarm {

/// Channel bounds for agent centres are [r, length - r] × [r, width - r].
struct Walls {
  double length = 0.0;
  double width = 0.0;
};

namespace detail {

inline bool clamp_to_walls(AgentState& a, const Walls& w) {
  bool moved = false;
  const double r = a.radius;
  if (a.pos.x < r) {
    a.pos.x = r;
    a.vel.x = std::max(a.vel.x, 0.0);
    moved = true;
  } else if (a.pos.x > w.length - r) {
    a.pos.x = w.length - r;
    a.vel.x = std::min(a.vel.x, 0.0);
    moved = true;
  }
  if (a.pos.y < r) {
    a.pos.y = r;
    a.vel.y = std::max(a.vel.y, 0.0);
    moved = true;
  } else if (a.pos.y > w.width - r) {
    a.pos.y = w.width - r;
    a.vel.y = std::min(a.vel.y, 0.0);
    moved = true;
  }
  return moved;
}

}  // namespace detail

/// Removes interpenetration: each overlapping pair is pushed apart equally
/// along the line of centres and loses its normal relative velocity; centres
/// are then clamped to the walls. Repeats a few sweeps so chains settle.
inline std::vector<AgentState> resolve_overlaps(std::vector<AgentState> agents, const Walls& walls,
                                                int max_sweeps = 8) {
  const std::size_t n = agents.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        AgentState& a = agents[i];
        AgentState& b = agents[j];
        const double contact = a.radius + b.radius;
        Vec2 d = b.pos - a.pos;
        double dist = norm(d);
        if (dist >= contact) continue;
        const Vec2 nrm = dist > 0.0 ? d / dist : Vec2{1.0, 0.0};
        const double half = 0.5 * (contact - dist);
        a.pos -= nrm * half;
        b.pos += nrm * half;
        const double closing = dot(a.vel - b.vel, nrm);
        if (closing > 0.0) {
          const double va = dot(a.vel, nrm);
          const double vb = dot(b.vel, nrm);
          const double vm = (a.mass * va + b.mass * vb) / (a.mass + b.mass);
          a.vel += nrm * (vm - va);
          b.vel += nrm * (vm - vb);
        }
        changed = true;
      }
    }
    for (auto& a : agents) changed = detail::clamp_to_walls(a, walls) || changed;
    if (!changed) break;
  }
  return agents;
}

}  // namespace fluxswarm::swarm
