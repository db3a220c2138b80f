#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fluxswarm/flow/grid.hpp"
#include "fluxswarm/swarm/agent.hpp"

namespace fluxswarm::swarm {

/// Rasterises agents into the solid-cell mask seen by the fluid solver.
///
/// A cell is solid when its centre lies inside (or on) an agent disk; the
/// nearest agent centre supplies the imposed velocity. The first and last
/// columns are never marked so the inflow and outlet stay open.
inline flow::ObstacleMask build_obstacle_mask(const std::vector<AgentState>& agents, const flow::GridSpec& g) {
  flow::ObstacleMask mask(g);
  Array2D<double> best(g.nx, g.ny, std::numeric_limits<double>::infinity());
  for (const auto& a : agents) {
    const int i_lo = std::max(1, static_cast<int>(std::floor((a.pos.x - a.radius) / g.dx - 0.5)));
    const int i_hi = std::min(g.nx - 2, static_cast<int>(std::ceil((a.pos.x + a.radius) / g.dx - 0.5)));
    const int j_lo = std::max(0, static_cast<int>(std::floor((a.pos.y - a.radius) / g.dy - 0.5)));
    const int j_hi = std::min(g.ny - 1, static_cast<int>(std::ceil((a.pos.y + a.radius) / g.dy - 0.5)));
    const double r2 = a.radius * a.radius;
    for (int i = i_lo; i <= i_hi; ++i) {
      for (int j = j_lo; j <= j_hi; ++j) {
        const Vec2 c = g.cell_center(i, j);
        const double d2 = (c.x - a.pos.x) * (c.x - a.pos.x) + (c.y - a.pos.y) * (c.y - a.pos.y);
        if (d2 > r2 || d2 >= best(i, j)) continue;
        best(i, j) = d2;
        mask.solid(i, j) = 1;
        mask.solid_u(i, j) = a.vel.x;
        mask.solid_v(i, j) = a.vel.y;
      }
    }
  }
  return mask;
}

}  // namespace fluxswarm::swarm
