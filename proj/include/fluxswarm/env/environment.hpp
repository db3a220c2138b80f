#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fluxswarm/env/config.hpp"
#include "fluxswarm/env/rewards.hpp"
#include "fluxswarm/flow/fluid_solver.hpp"
#include "fluxswarm/swarm/collisions.hpp"
#include "fluxswarm/swarm/coupling.hpp"
#include "fluxswarm/swarm/forces.hpp"

namespace fluxswarm::env {

inline constexpr int kObsDim = 8;
inline constexpr int kNumObjectives = 3;

using Observation = std::array<double, kObsDim>;
using RewardRow = std::array<double, kNumObjectives>;  // progress, energy, smoothness

enum class Status { kRunning, kSuccess, kFailure, kTruncated };
enum class TruncationCause { kNone, kTimeout, kCfdDivergence };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::kRunning: return "running";
    case Status::kSuccess: return "success";
    case Status::kFailure: return "failure";
    case Status::kTruncated: return "truncated";
  }
  return "?";
}

inline std::string_view to_string(TruncationCause c) {
  switch (c) {
    case TruncationCause::kNone: return "none";
    case TruncationCause::kTimeout: return "timeout";
    case TruncationCause::kCfdDivergence: return "cfd_divergence";
  }
  return "?";
}

struct EpisodeStatus {
  Status status = Status::kRunning;
  TruncationCause cause = TruncationCause::kNone;

  bool terminal() const { return status != Status::kRunning; }
  /// True termination (no bootstrap): success or failure.
  bool done() const { return status == Status::kSuccess || status == Status::kFailure; }
  bool truncated() const { return status == Status::kTruncated; }
  std::string label() const {
    return status == Status::kTruncated ? std::string(to_string(status)) + ":" + std::string(to_string(cause))
                                        : std::string(to_string(status));
  }
};

struct StepInfo {
  std::vector<swarm::ForceBreakdown> forces;
  std::vector<Vec2> actions;  // executed (clamped)
  double t = 0.0;             // time after the step
  int step = 0;               // steps taken in this episode, including this one
  int max_poisson_iterations = 0;
  int courant_warnings = 0;   // substeps whose Courant number exceeded the limit
  double max_speed = 0.0;
};

struct StepResult {
  std::vector<Observation> observations;
  std::vector<RewardRow> rewards;
  EpisodeStatus status;
  StepInfo info;
};

/// Observation of one agent: position scaled by the channel extents, velocity
/// by u_ref, and 4 rim pressures (angles 0, π/2, π, 3π/2) by ρ u_ref².
inline Observation observe(const swarm::AgentState& a, const flow::FluidState& fluid, const flow::GridSpec& g,
                           double rho, double u_ref) {
  Observation o{};
  o[0] = a.pos.x / g.length();
  o[1] = a.pos.y / g.width();
  o[2] = a.vel.x / u_ref;
  o[3] = a.vel.y / u_ref;
  const double p_scale = rho * u_ref * u_ref;
  const Vec2 offs[4] = {{a.radius, 0.0}, {0.0, a.radius}, {-a.radius, 0.0}, {0.0, -a.radius}};
  for (int k = 0; k < 4; ++k) {
    o[4 + k] = flow::sample_pressure(fluid.pressure, g, flow::clamp_to_domain(g, a.pos + offs[k])) / p_scale;
  }
  return o;
}

/// Full mutable state of an environment, sufficient to resume bit-identically.
struct EnvState {
  flow::FluidState fluid;
  std::vector<swarm::AgentState> agents;
  EpisodeStatus status;
  int step = 0;
  long long episode = 0;
  std::string rng_state;
};

/// One channel with a swarm: couples the fluid solver and the agents and
/// scores each environment step with the three objectives.
class Environment {
 public:
  explicit Environment(EnvConfig cfg)
      : cfg_((cfg.validate(), std::move(cfg))), grid_(cfg_.grid()),
        solver_(grid_, cfg_.fluid, cfg_.waveform, cfg_.dt_sub(), cfg_.solver), rng_(cfg_.seed) {
    reset();
  }

  const EnvConfig& config() const { return cfg_; }
  const flow::GridSpec& grid() const { return grid_; }
  const flow::FluidState& fluid() const { return fluid_; }
  const std::vector<swarm::AgentState>& agents() const { return agents_; }
  const EpisodeStatus& status() const { return status_; }
  double time() const { return static_cast<double>(step_) * cfg_.dt; }
  int step_count() const { return step_; }
  long long episode() const { return episode_; }
  int n_agents() const { return static_cast<int>(agents_.size()); }

  /// Random stream for sampling this environment's actions.
  std::mt19937_64& rng() { return rng_; }

  /// Starts a new episode from the deterministic initial condition. The
  /// action stream is reseeded only when a seed is given.
  std::vector<Observation> reset(std::optional<std::uint64_t> seed = std::nullopt) {
    if (seed) {
      cfg_.seed = *seed;
      rng_.seed(*seed);
    }
    agents_ = swarm::make_lattice(cfg_.swarm, grid_.width());
    fluid_ = solver_.initial_state(0.0);
    const auto mask = swarm::build_obstacle_mask(agents_, grid_);
    flow::apply_boundary_conditions(fluid_.vel, grid_, cfg_.waveform, 0.0, &mask);
    solver_.project(fluid_, mask, cfg_.dt_sub());
    fluid_.pressure = flow::PressureField(grid_);
    status_ = {};
    step_ = 0;
    if (started_) ++episode_;
    started_ = true;
    return observations();
  }

  std::vector<Observation> observations() const {
    std::vector<Observation> out;
    out.reserve(agents_.size());
    for (const auto& a : agents_) out.push_back(observe(a, fluid_, grid_, cfg_.fluid.rho, cfg_.u_ref));
    return out;
  }

  /// Advances one environment step with normalized actions (one per agent).
  StepResult step(const std::vector<Vec2>& actions) {
    if (status_.terminal()) throw Error("env: step() called on a finished episode");
    if (actions.size() != agents_.size()) throw Error("env: expected one action per agent");

    StepResult res;
    auto& info = res.info;
    info.actions.reserve(actions.size());
    for (const Vec2& a : actions) info.actions.push_back(swarm::clamp_action(a));
    std::vector<Vec2> before;
    before.reserve(agents_.size());
    for (const auto& a : agents_) before.push_back(a.pos);

    // Forces are re-evaluated from the latest fields before every substep;
    // the reported breakdown is their average over the step.
    info.forces.assign(agents_.size(), swarm::ForceBreakdown{});
    const swarm::Walls walls{grid_.length(), grid_.width()};
    const double h = cfg_.dt_sub();
    bool diverged = false;
    int done_substeps = 0;
    for (int s = 0; s < cfg_.substeps && !diverged; ++s) {
      const auto forces = swarm::compute_forces(fluid_, grid_, cfg_.fluid, agents_, info.actions, cfg_.swarm.f_max);
      for (std::size_t k = 0; k < agents_.size(); ++k) {
        agents_[k] = swarm::integrate_agent(agents_[k], forces[k].total(), h);
        accumulate(info.forces[k], forces[k]);
      }
      ++done_substeps;
      agents_ = swarm::resolve_overlaps(std::move(agents_), walls);
      const auto mask = swarm::build_obstacle_mask(agents_, grid_);
      const double t = (static_cast<double>(step_) * cfg_.substeps + s) * h;
      try {
        const auto rep = solver_.step(fluid_, mask, h, t);
        info.max_poisson_iterations = std::max(info.max_poisson_iterations, rep.poisson_iterations);
        info.courant_warnings += rep.courant_exceeded;
        info.max_speed = std::max(info.max_speed, rep.max_speed);
        diverged = rep.blowup;
      } catch (const SolverDivergence&) {
        diverged = true;
      }
      for (const auto& a : agents_) diverged = diverged || !is_finite(a.pos) || !is_finite(a.vel);
    }
    for (std::size_t k = 0; k < agents_.size(); ++k) {
      scale(info.forces[k], 1.0 / done_substeps);
      info.forces[k].internal = swarm::internal_force(info.actions[k], cfg_.swarm.f_max);
    }
    ++step_;
    info.step = step_;
    info.t = time();

    res.rewards.resize(agents_.size());
    const double f_max = cfg_.swarm.f_max;
    for (std::size_t k = 0; k < agents_.size(); ++k) {
      const Vec2 disp = agents_[k].pos - before[k];
      auto& r = res.rewards[k];
      r[0] = reward_progress(agents_[k].pos.x, -disp.x, cfg_.x_success, cfg_.x_failure);
      r[1] = reward_energy(swarm::internal_force(info.actions[k], f_max), disp, f_max);
      r[2] = reward_smooth(info.actions[k], agents_[k].prev_action);
      if (diverged) {
        for (double& v : r) v = std::isfinite(v) ? v : 0.0;
      }
    }

    status_ = evaluate_status(diverged);
    for (std::size_t k = 0; k < agents_.size(); ++k) agents_[k].prev_action = info.actions[k];
    res.status = status_;
    res.observations = observations();
    if (diverged) {
      for (auto& o : res.observations)
        for (double& v : o) v = std::isfinite(v) ? v : 0.0;
    }
    return res;
  }

  EnvState save_state() const {
    std::ostringstream os;
    os << rng_;
    return EnvState{fluid_, agents_, status_, step_, episode_, os.str()};
  }

  void load_state(const EnvState& s) {
    fluid_ = s.fluid;
    agents_ = s.agents;
    status_ = s.status;
    step_ = s.step;
    episode_ = s.episode;
    started_ = true;
    std::istringstream is(s.rng_state);
    is >> rng_;
    if (!is) throw Error("env: corrupt random-engine state");
  }

 private:
  static void accumulate(swarm::ForceBreakdown& acc, const swarm::ForceBreakdown& f) {
    acc.hydro += f.hydro;
    acc.drag += f.drag;
    acc.internal += f.internal;
    acc.contact += f.contact;
  }
  static void scale(swarm::ForceBreakdown& f, double s) {
    f.hydro *= s;
    f.drag *= s;
    f.internal *= s;
    f.contact *= s;
  }

  // Failure dominates success, which dominates truncation.
  EpisodeStatus evaluate_status(bool diverged) const {
    double mean_x = 0.0;
    bool failed = false;
    for (const auto& a : agents_) {
      mean_x += a.pos.x;
      failed = failed || a.pos.x >= cfg_.x_failure;
    }
    mean_x /= static_cast<double>(agents_.size());
    if (failed) return {Status::kFailure, TruncationCause::kNone};
    if (mean_x <= cfg_.x_success) return {Status::kSuccess, TruncationCause::kNone};
    if (diverged) return {Status::kTruncated, TruncationCause::kCfdDivergence};
    if (step_ >= cfg_.max_steps()) return {Status::kTruncated, TruncationCause::kTimeout};
    return {};
  }

  EnvConfig cfg_;
  flow::GridSpec grid_;
  flow::FluidSolver solver_;
  flow::FluidState fluid_;
  std::vector<swarm::AgentState> agents_;
  EpisodeStatus status_;
  int step_ = 0;
  long long episode_ = 0;
  bool started_ = false;
  std::mt19937_64 rng_;
};

}  // namespace fluxswarm::env
