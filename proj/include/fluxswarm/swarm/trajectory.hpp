#pragma once

#include <ostream>
#include <vector>

#include "fluxswarm/core/csv.hpp"
#include "fluxswarm/swarm/agent.hpp"
#include "fluxswarm/swarm/forces.hpp"

namespace fluxswarm::swarm {

inline void write_trajectory_header(std::ostream& os) {
  write_csv_header(os, {"step", "t", "agent_id", "x", "y", "vx", "vy", "ax_action", "ay_action", "f_hydro_x",
                        "f_hydro_y", "f_drag_x", "f_drag_y"});
}

/// One row per agent. `actions` are the executed (clamped) actions of the step
/// and `forces` the breakdown used for it.
inline void write_trajectory_rows(std::ostream& os, long long step, double t, const std::vector<AgentState>& agents,
                                  const std::vector<Vec2>& actions, const std::vector<ForceBreakdown>& forces) {
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const auto& a = agents[k];
    const Vec2 act = k < actions.size() ? actions[k] : Vec2{};
    const ForceBreakdown f = k < forces.size() ? forces[k] : ForceBreakdown{};
    CsvRow(os) << step << t << a.id << a.pos.x << a.pos.y << a.vel.x << a.vel.y << act.x << act.y << f.hydro.x
               << f.hydro.y << f.drag.x << f.drag.y;
  }
}

}  // namespace fluxswarm::swarm
