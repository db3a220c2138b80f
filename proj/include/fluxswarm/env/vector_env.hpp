#pragma once

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "fluxswarm/env/environment.hpp"

namespace fluxswarm::env {

/// Worker count from FLUXSWARM_THREADS (default 1).
inline int thread_count_from_env() {
  const char* s = std::getenv("FLUXSWARM_THREADS");
  if (!s || !*s) return 1;
  try {
    return std::max(1, std::stoi(s));
  } catch (const std::exception&) {
    return 1;
  }
}

/// Result of one vectorized step for one environment. When the episode ended
/// on this step, `observations` already belong to the fresh episode and
/// `final_observations` hold the terminal ones.
struct VecStepResult {
  StepResult step;
  std::vector<Observation> final_observations;
  bool reset = false;
};

/// Independent environments stepped together with automatic reset. Results
/// come back in environment order regardless of the worker count.
class VectorEnv {
 public:
  explicit VectorEnv(const std::vector<EnvConfig>& configs, int threads = 1) : threads_(std::max(1, threads)) {
    envs_.reserve(configs.size());
    for (const auto& c : configs) envs_.emplace_back(c);
  }

  int size() const { return static_cast<int>(envs_.size()); }
  Environment& operator[](int k) { return envs_[static_cast<std::size_t>(k)]; }
  const Environment& operator[](int k) const { return envs_[static_cast<std::size_t>(k)]; }

  std::vector<std::vector<Observation>> observations() const {
    std::vector<std::vector<Observation>> out;
    for (const auto& e : envs_) out.push_back(e.observations());
    return out;
  }

  std::vector<VecStepResult> step(const std::vector<std::vector<Vec2>>& actions) {
    std::vector<VecStepResult> out(envs_.size());
    auto run = [&](std::size_t k) {
      auto& r = out[k];
      r.step = envs_[k].step(actions[k]);
      if (r.step.status.terminal()) {
        r.final_observations = std::move(r.step.observations);
        r.step.observations = envs_[k].reset();
        r.reset = true;
      }
    };
    const std::size_t n = envs_.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads_), n);
    if (workers <= 1) {
      for (std::size_t k = 0; k < n; ++k) run(k);
      return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t k = w; k < n; k += workers) run(k);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    return out;
  }

 private:
  std::vector<Environment> envs_;
  int threads_;
};

}  // namespace fluxswarm::env
