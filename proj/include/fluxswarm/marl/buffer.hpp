#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fluxswarm/env/environment.hpp"
#include "fluxswarm/marl/gae.hpp"

namespace fluxswarm::marl {

/// One agent's sample at one env step.
struct Transition {
  env::Observation obs{};
  std::array<double, 2> action{};  // raw Gaussian draw
  double log_prob = 0.0;
  env::RewardRow reward{};
};

/// Shared data of one (env, step) tuple: the critic's sample.
struct EnvStepRecord {
  std::vector<double> joint_obs;
  std::array<double, env::kNumObjectives> value{};
  std::array<double, env::kNumObjectives> next_value{};
  bool done = false;       // success or failure
  bool truncated = false;  // timeout or divergence
};

/// Rollout storage laid out env-major: step record (e, t) at e*T + t, agent
/// sample (e, t, i) at (e*T + t)*n_agents + i.
class RolloutBuffer {
 public:
  RolloutBuffer() = default;
  RolloutBuffer(int n_envs, int length, int n_agents)
      : n_envs_(n_envs), length_(length), n_agents_(n_agents),
        steps_(static_cast<std::size_t>(n_envs) * length),
        samples_(static_cast<std::size_t>(n_envs) * length * n_agents) {}

  int n_envs() const { return n_envs_; }
  int length() const { return length_; }
  int n_agents() const { return n_agents_; }
  std::size_t n_steps() const { return steps_.size(); }

  std::size_t step_index(int e, int t) const { return static_cast<std::size_t>(e) * length_ + t; }
  EnvStepRecord& step(int e, int t) { return steps_[step_index(e, t)]; }
  const EnvStepRecord& step(std::size_t k) const { return steps_[k]; }
  EnvStepRecord& step(std::size_t k) { return steps_[k]; }
  Transition& sample(std::size_t step_k, int i) { return samples_[step_k * n_agents_ + i]; }
  const Transition& sample(std::size_t step_k, int i) const { return samples_[step_k * n_agents_ + i]; }

 private:
  int n_envs_ = 0;
  int length_ = 0;
  int n_agents_ = 0;
  std::vector<EnvStepRecord> steps_;
  std::vector<Transition> samples_;
};

/// Per-objective advantages (one per agent sample) and critic targets (one
/// per env step: the agent mean of advantage plus value).
struct AdvantageSet {
  std::array<std::vector<double>, env::kNumObjectives> advantages;
  std::array<std::vector<double>, env::kNumObjectives> targets;
};

/// Per-agent GAE against the shared centralized value, each objective
/// independently.
inline AdvantageSet compute_gae(const RolloutBuffer& buf, double gamma, double lambda) {
  AdvantageSet out;
  const int T = buf.length();
  const int n = buf.n_agents();
  for (auto& a : out.advantages) a.assign(buf.n_steps() * n, 0.0);
  for (auto& v : out.targets) v.assign(buf.n_steps(), 0.0);
  std::vector<double> r(T), v(T), nv(T);
  std::vector<char> done(T), end(T);
  for (int e = 0; e < buf.n_envs(); ++e) {
    const std::size_t base = buf.step_index(e, 0);
    for (int t = 0; t < T; ++t) {
      const auto& s = buf.step(base + t);
      done[t] = s.done;
      end[t] = s.done || s.truncated;
    }
    for (int k = 0; k < env::kNumObjectives; ++k) {
      for (int t = 0; t < T; ++t) {
        v[t] = buf.step(base + t).value[k];
        nv[t] = buf.step(base + t).next_value[k];
      }
      for (int i = 0; i < n; ++i) {
        for (int t = 0; t < T; ++t) r[t] = buf.sample(base + t, i).reward[k];
        const auto adv = gae(r, v, nv, done, end, gamma, lambda);
        for (int t = 0; t < T; ++t) {
          out.advantages[k][(base + t) * n + i] = adv[t];
          out.targets[k][base + t] += (adv[t] + v[t]) / n;
        }
      }
    }
  }
  return out;
}

}  // namespace fluxswarm::marl
