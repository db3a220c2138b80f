#pragma once

#include <cstdint>

#include "fluxswarm/core/errors.hpp"

namespace fluxswarm::marl {

struct PPOConfig {
  double clip = 0.2;
  double entropy_coef = 0.01;
  double gamma = 0.95;
  double lambda = 0.95;
  double lr = 1e-3;
  int epochs = 4;
  int rollout_length = 16;  // env steps per env between updates
  int minibatch_size = 4;   // env-steps per minibatch (times n_agents actor samples)
  int n_envs = 4;
  long long total_steps_per_env = 27000;
  bool pcgrad_enabled = true;
  int checkpoint_every = 50;  // updates
  std::uint64_t seed = 0;

  long long steps_per_update() const { return static_cast<long long>(rollout_length) * n_envs; }
  long long total_updates() const { return (total_steps_per_env + rollout_length - 1) / rollout_length; }

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("ppo: gamma must be in (0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("ppo: lambda must be in [0, 1]");
    if (!(clip > 0.0)) throw ValidationError("ppo: clip must be positive");
    if (!(lr > 0.0)) throw ValidationError("ppo: lr must be positive");
    if (!(entropy_coef >= 0.0)) throw ValidationError("ppo: entropy_coef must be >= 0");
    if (epochs < 1 || rollout_length < 1 || minibatch_size < 1 || n_envs < 1)
      throw ValidationError("ppo: epochs, rollout_length, minibatch_size and n_envs must be >= 1");
    if (total_steps_per_env < 1) throw ValidationError("ppo: total_steps_per_env must be >= 1");
    if (checkpoint_every < 1) throw ValidationError("ppo: checkpoint_every must be >= 1");
  }
};

}  // namespace fluxswarm::marl
