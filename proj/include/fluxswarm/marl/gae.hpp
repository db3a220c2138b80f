#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fluxswarm::marl {

/// Generalized advantage estimates for one reward stream.
///
/// `next_values[t]` is V of the state actually reached by step t (for a
/// truncated step, the final observation before the auto-reset; past the
/// rollout end, the bootstrap value). `done[t]` marks a true termination:
/// no bootstrap. `episode_end[t]` (done or truncated) stops the recursion.
inline std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                               std::span<const double> next_values, std::span<const char> done,
                               std::span<const char> episode_end, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || done.size() != n || episode_end.size() != n)
    throw std::invalid_argument("gae: length mismatch");
  std::vector<double> adv(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double boot = done[k] ? 0.0 : gamma * next_values[k];
    const double delta = rewards[k] + boot - values[k];
    const double carry = episode_end[k] ? 0.0 : gamma * lambda * next_adv;
    adv[k] = delta + carry;
    next_adv = adv[k];
  }
  return adv;
}

}  // namespace fluxswarm::marl
