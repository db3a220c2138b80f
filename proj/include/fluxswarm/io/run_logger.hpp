#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "fluxswarm/core/csv.hpp"
#include "fluxswarm/core/errors.hpp"
#include "fluxswarm/io/snapshot.hpp"
#include "fluxswarm/marl/evaluate.hpp"
#include "fluxswarm/marl/trainer.hpp"

namespace fluxswarm::io {

inline void write_rewards_header(std::ostream& os) {
  write_csv_header(os, {"global_step", "env_id", "episode_id", "step_in_episode", "mean_r_progress", "mean_r_energy",
                        "mean_r_smooth", "status"});
}

inline void write_episodes_header(std::ostream& os) {
  write_csv_header(os, {"global_step", "env_id", "episode_id", "length", "norm_r_progress", "norm_r_energy",
                        "norm_r_smooth", "status"});
}

inline void write_update_stats_header(std::ostream& os) {
  write_csv_header(os, {"update", "global_step", "loss_progress", "loss_energy", "loss_smooth", "critic_loss", "entropy",
                        "clip_fraction", "cos_progress_energy", "cos_progress_smooth", "cos_energy_smooth",
                        "min_cos_progress_energy", "min_cos_progress_smooth", "min_cos_energy_smooth", "conflicts"});
}

inline void write_reward_row(std::ostream& os, const marl::StepLog& s) {
  CsvRow(os) << s.global_step << s.env_id << s.episode_id << s.step_in_episode << s.mean_reward[0] << s.mean_reward[1]
             << s.mean_reward[2] << s.status;
}

inline void write_episode_row(std::ostream& os, const marl::EpisodeLog& e) {
  CsvRow(os) << e.global_step << e.env_id << e.episode_id << e.length << e.normalized[0] << e.normalized[1]
             << e.normalized[2] << e.status;
}

inline void write_update_row(std::ostream& os, const marl::UpdateStats& u) {
  CsvRow(os) << u.update << u.global_step << u.actor_loss[0] << u.actor_loss[1] << u.actor_loss[2] << u.critic_loss
             << u.entropy << u.clip_fraction << u.cos_mean[0] << u.cos_mean[1] << u.cos_mean[2] << u.cos_min[0]
             << u.cos_min[1] << u.cos_min[2] << u.conflicts;
}

/// Paths of a run directory: runs/<name>/{config.toml, rewards.csv,
/// episodes.csv, update_stats.csv, snapshots/, checkpoints/}.
struct RunDir {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.toml"; }
  std::filesystem::path rewards() const { return root / "rewards.csv"; }
  std::filesystem::path episodes() const { return root / "episodes.csv"; }
  std::filesystem::path update_stats() const { return root / "update_stats.csv"; }
  std::filesystem::path snapshots() const { return root / "snapshots"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
};

inline std::ofstream open_log(const std::filesystem::path& p, bool append) {
  std::ofstream os(p, append ? std::ios::app : std::ios::trunc);
  if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
  return os;
}

/// Writes the CSV logs of a run and field snapshots of environment 0.
/// Everything is flushed after each update.
class RunLogger : public marl::TrainingSink {
 public:
  RunLogger(RunDir dir, int n_envs, long long snapshot_every, bool append)
      : dir_(std::move(dir)), n_envs_(n_envs), snapshot_every_(snapshot_every) {
    std::filesystem::create_directories(dir_.snapshots());
    std::filesystem::create_directories(dir_.checkpoints());
    rewards_ = open_log(dir_.rewards(), append);
    episodes_ = open_log(dir_.episodes(), append);
    updates_ = open_log(dir_.update_stats(), append);
    if (!append) {
      write_rewards_header(rewards_);
      write_episodes_header(episodes_);
      write_update_stats_header(updates_);
    }
  }

  void on_step(const marl::StepLog& s) override { write_reward_row(rewards_, s); }
  void on_episode(const marl::EpisodeLog& e) override { write_episode_row(episodes_, e); }
  void on_update(const marl::UpdateStats& u) override {
    write_update_row(updates_, u);
    for (auto* os : {&rewards_, &episodes_, &updates_}) {
      os->flush();
      if (!*os) throw IoError("log write failed in '" + dir_.root.string() + "'");
    }
  }
  void on_env_step(int env_id, long long global_step, const env::Environment& e, const env::VecStepResult& r) override {
    if (env_id != 0 || snapshot_every_ <= 0) return;
    // Environments step in order, so env 0's step count follows from the global one.
    const long long env0_steps = (global_step - 1) / n_envs_ + 1;
    if (env0_steps % snapshot_every_ != 0) return;
    write_snapshot(e.fluid(), e.grid(), e.agents(), e.time(), global_step, dir_.snapshots(), r.step.info.actions,
                   r.step.info.forces);
  }

 private:
  RunDir dir_;
  int n_envs_;
  long long snapshot_every_;
  std::ofstream rewards_;
  std::ofstream episodes_;
  std::ofstream updates_;
};

}  // namespace fluxswarm::io
