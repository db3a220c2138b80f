#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fluxswarm/io/checkpoint.hpp"
#include "fluxswarm/io/config.hpp"
#include "fluxswarm/io/run_logger.hpp"

namespace fluxswarm::io {

inline RunDir run_dir_for(const RunConfig& cfg) { return {std::filesystem::path(cfg.output_dir) / cfg.run_name}; }

/// Trains until the configured step budget, writing logs, snapshots and a
/// checkpoint every checkpoint_every updates plus one at the end. With
/// `resume`, continues from that checkpoint and appends to the logs.
inline std::filesystem::path run_training(const RunConfig& cfg, int threads = 1,
                                          const std::optional<std::filesystem::path>& resume = std::nullopt,
                                          marl::TrainingSink* extra = nullptr) {
  const RunDir dir = run_dir_for(cfg);
  std::filesystem::create_directories(dir.root);
  marl::Trainer tr = resume ? restore_trainer(load_checkpoint(*resume), threads) : marl::Trainer(cfg.train, threads);
  if (!resume) write_file(dir.config(), write_config(cfg));
  RunLogger logger(dir, cfg.train.ppo.n_envs, cfg.snapshot_every, resume.has_value());

  struct Fanout : marl::TrainingSink {
    marl::TrainingSink* a;
    marl::TrainingSink* b;
    void on_step(const marl::StepLog& s) override { a->on_step(s); if (b) b->on_step(s); }
    void on_episode(const marl::EpisodeLog& e) override { a->on_episode(e); if (b) b->on_episode(e); }
    void on_update(const marl::UpdateStats& u) override { a->on_update(u); if (b) b->on_update(u); }
    void on_env_step(int id, long long gs, const env::Environment& e, const env::VecStepResult& r) override {
      a->on_env_step(id, gs, e, r);
      if (b) b->on_env_step(id, gs, e, r);
    }
  } sink;
  sink.a = &logger;
  sink.b = extra;

  std::filesystem::path last;
  while (!tr.finished()) {
    tr.iterate(&sink);
    if (tr.updates_done() % cfg.train.ppo.checkpoint_every == 0 || tr.finished()) {
      last = dir.checkpoints() / checkpoint_name(tr.updates_done());
      save_checkpoint(last, cfg, tr);
    }
  }
  return last;
}

}  // namespace fluxswarm::io
