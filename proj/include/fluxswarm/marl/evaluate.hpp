#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fluxswarm/env/environment.hpp"
#include "fluxswarm/marl/baselines.hpp"
#include "fluxswarm/nn/networks.hpp"

namespace fluxswarm::marl {

/// Maps the environment's current state to one action per agent. Policies
/// that sample draw from the environment's own random stream.
using Policy = std::function<std::vector<Vec2>(env::Environment&)>;

inline nn::Matrix observation_matrix(const std::vector<env::Observation>& obs) {
  nn::Matrix x(env::kObsDim, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (int d = 0; d < env::kObsDim; ++d) x(d, static_cast<Eigen::Index>(i)) = obs[i][static_cast<std::size_t>(d)];
  return x;
}

inline Policy actor_policy(const nn::Actor& actor, bool deterministic) {
  return [&actor, deterministic](env::Environment& e) {
    const nn::Matrix out = actor.net.forward(observation_matrix(e.observations()));
    std::vector<Vec2> acts;
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
      const auto h = nn::Actor::head(out, i);
      const auto s = deterministic ? nn::mode_action(h) : nn::sample_action(h, e.rng());
      acts.push_back({s.executed[0], s.executed[1]});
    }
    return acts;
  };
}

inline Policy baseline_policy(BaselineKind kind) {
  return [kind](env::Environment& e) {
    std::vector<Vec2> acts;
    for (const auto& a : e.agents()) acts.push_back(baseline_action(kind, a, e.grid().width()));
    return acts;
  };
}

/// Per-objective reward row averaged over agents.
inline env::RewardRow agent_mean(const std::vector<env::RewardRow>& rows) {
  env::RewardRow m{};
  for (const auto& r : rows)
    for (int k = 0; k < env::kNumObjectives; ++k) m[k] += r[k];
  for (double& v : m) v /= static_cast<double>(rows.size());
  return m;
}

struct EpisodeResult {
  int length = 0;
  env::RewardRow normalized{};  // agent-mean reward summed over steps, divided by length
  std::string status;
  std::vector<env::RewardRow> step_means;
};

struct EvalSummary {
  std::vector<EpisodeResult> episodes;
  env::RewardRow mean{};
  env::RewardRow std{};
};

inline EpisodeResult run_episode(env::Environment& e, const Policy& policy) {
  EpisodeResult res;
  env::RewardRow sums{};
  while (!e.status().terminal()) {
    const auto step = e.step(policy(e));
    const auto m = agent_mean(step.rewards);
    res.step_means.push_back(m);
    for (int k = 0; k < env::kNumObjectives; ++k) sums[k] += m[k];
  }
  res.length = e.step_count();
  for (int k = 0; k < env::kNumObjectives; ++k) res.normalized[k] = sums[k] / res.length;
  res.status = e.status().label();
  return res;
}

/// Runs `n_episodes` consecutive episodes from `seed` and reports the
/// length-normalized objective triples with their mean and (population) std.
inline EvalSummary evaluate(const env::EnvConfig& cfg, const Policy& policy, int n_episodes, std::uint64_t seed) {
  env::EnvConfig c = cfg;
  c.seed = seed;
  env::Environment e(c);
  EvalSummary out;
  for (int k = 0; k < n_episodes; ++k) {
    if (k > 0) e.reset();
    out.episodes.push_back(run_episode(e, policy));
  }
  if (out.episodes.empty()) return out;
  const double n = static_cast<double>(out.episodes.size());
  for (const auto& ep : out.episodes)
    for (int k = 0; k < env::kNumObjectives; ++k) out.mean[k] += ep.normalized[k] / n;
  for (const auto& ep : out.episodes)
    for (int k = 0; k < env::kNumObjectives; ++k) out.std[k] += std::pow(ep.normalized[k] - out.mean[k], 2) / n;
  for (double& s : out.std) s = std::sqrt(s);
  return out;
}

}  // namespace fluxswarm::marl
