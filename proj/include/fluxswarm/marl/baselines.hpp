#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fluxswarm/core/vec2.hpp"
#include "fluxswarm/swarm/agent.hpp"

namespace fluxswarm::marl {

enum class BaselineKind { kUpstreamMax, kWallHug };

inline BaselineKind parse_baseline(std::string_view s) {
  if (s == "upstream_max") return BaselineKind::kUpstreamMax;
  if (s == "wall_hug") return BaselineKind::kWallHug;
  throw std::invalid_argument("unknown baseline kind '" + std::string(s) + "' (expected upstream_max or wall_hug)");
}

inline std::string_view to_string(BaselineKind k) {
  return k == BaselineKind::kUpstreamMax ? "upstream_max" : "wall_hug";
}

/// Full thrust upstream, or upstream and toward the nearer wall.
inline Vec2 baseline_action(BaselineKind kind, const swarm::AgentState& a, double channel_width) {
  if (kind == BaselineKind::kUpstreamMax) return {-1.0, 0.0};
  const double s = std::numbers::sqrt2 / 2.0;
  return {-s, a.pos.y >= channel_width / 2.0 ? s : -s};
}

}  // namespace fluxswarm::marl
