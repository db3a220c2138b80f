#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fluxswarm/env/vector_env.hpp"
#include "fluxswarm/io/checkpoint.hpp"
#include "fluxswarm/io/config.hpp"
#include "fluxswarm/io/run.hpp"
#include "fluxswarm/io/run_logger.hpp"
#include "fluxswarm/io/snapshot.hpp"
#include "fluxswarm/marl/evaluate.hpp"

namespace fs = std::filesystem;
using namespace fluxswarm;

namespace {

void write_episode_summaries(const marl::EvalSummary& s, const std::string& out_path) {
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::trunc);
    if (!file) throw IoError("cannot open '" + out_path + "' for writing");
    write_csv_header(file, {"episode", "length", "norm_r_progress", "norm_r_energy", "norm_r_smooth", "status"});
  }
  for (std::size_t k = 0; k < s.episodes.size(); ++k) {
    const auto& e = s.episodes[k];
    std::printf("episode %zu: length %d  progress %.4f  energy %.4f  smooth %.4f  %s\n", k, e.length, e.normalized[0],
                e.normalized[1], e.normalized[2], e.status.c_str());
    if (file.is_open())
      CsvRow(file) << static_cast<long long>(k) << e.length << e.normalized[0] << e.normalized[1] << e.normalized[2]
                   << e.status;
  }
  std::printf("mean: progress %.4f  energy %.4f  smooth %.4f\n", s.mean[0], s.mean[1], s.mean[2]);
  std::printf("std:  progress %.4f  energy %.4f  smooth %.4f\n", s.std[0], s.std[1], s.std[2]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluxswarm: multi-objective swarm navigation in pulsatile channel flow"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, snapshot_path, out_path, kind, resume_path;
  bool no_pcgrad = false, deterministic = false;
  int episodes = 1;
  std::optional<std::uint64_t> seed;

  auto* train = app.add_subcommand("train", "train a policy from a TOML config");
  train->add_option("--config", config_path, "run configuration (TOML)")->required()->check(CLI::ExistingFile);
  train->add_flag("--no-pcgrad", no_pcgrad, "sum objective gradients instead of gradient surgery");
  train->add_option("--resume", resume_path, "checkpoint directory to continue from")->check(CLI::ExistingDirectory);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a trained policy");
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--episodes", episodes, "number of episodes")->required()->check(CLI::PositiveNumber);
  evaluate->add_flag("--deterministic", deterministic, "act with the policy mean");
  evaluate->add_option("--seed", seed, "environment seed (default: config seed)");
  evaluate->add_option("--out", out_path, "write episode summaries as CSV");

  auto* baseline = app.add_subcommand("baseline", "run a fixed baseline policy");
  baseline->add_option("--kind", kind, "upstream_max or wall_hug")->required()->check(CLI::IsMember({"upstream_max", "wall_hug"}));
  baseline->add_option("--episodes", episodes, "number of episodes")->required()->check(CLI::PositiveNumber);
  baseline->add_option("--config", config_path, "run configuration (TOML); defaults if omitted")->check(CLI::ExistingFile);
  baseline->add_option("--seed", seed, "environment seed (default: config seed)");
  baseline->add_option("--out", out_path, "write episode summaries as CSV");

  auto* render = app.add_subcommand("render", "render a field snapshot as a P6 PPM");
  render->add_option("--snapshot", snapshot_path, "snapshot sidecar (.json) or binary (.bin)")->required()->check(CLI::ExistingFile);
  render->add_option("--out", out_path, "output .ppm path")->required();

  auto* inspect = app.add_subcommand("inspect", "print checkpoint architecture and progress");
  inspect->add_option("--checkpoint", checkpoint_path, "checkpoint directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const int threads = env::thread_count_from_env();
    if (train->parsed()) {
      io::RunConfig cfg = io::load_config(config_path);
      if (no_pcgrad) cfg.train.ppo.pcgrad_enabled = false;
      std::optional<fs::path> resume;
      if (!resume_path.empty()) resume = resume_path;
      const fs::path last = io::run_training(cfg, threads, resume);
      std::printf("run directory: %s\nfinal checkpoint: %s\n", io::run_dir_for(cfg).root.string().c_str(),
                  last.string().c_str());
    } else if (evaluate->parsed()) {
      const io::Checkpoint c = io::load_checkpoint(checkpoint_path);
      const marl::Trainer tr = io::restore_trainer(c);
      const auto s = marl::evaluate(c.config.train.env, marl::actor_policy(tr.actor(), deterministic), episodes,
                                    seed.value_or(c.config.seed));
      write_episode_summaries(s, out_path);
    } else if (baseline->parsed()) {
      const io::RunConfig cfg = config_path.empty() ? io::parse_config("") : io::load_config(config_path);
      const auto s = marl::evaluate(cfg.train.env, marl::baseline_policy(marl::parse_baseline(kind)), episodes,
                                    seed.value_or(cfg.seed));
      write_episode_summaries(s, out_path);
    } else if (render->parsed()) {
      const auto snap = io::read_snapshot(snapshot_path);
      io::write_file(out_path, io::render_ppm(snap));
      std::printf("wrote %s (%d x %d)\n", out_path.c_str(), snap.nx, snap.ny);
    } else if (inspect->parsed()) {
      const io::Checkpoint c = io::load_checkpoint(checkpoint_path);
      auto sizes = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " -> " : "") + std::to_string(v[k]);
        return s;
      };
      std::printf("actor:  %s (tanh hidden, Gaussian head: mean[2], log_std[2]), %lld params\n",
                  sizes(c.actor_sizes).c_str(), static_cast<long long>(c.state.actor.size()));
      std::printf("critic: %s (tanh hidden, heads: progress, energy, smoothness), %lld params\n",
                  sizes(c.critic_sizes).c_str(), static_cast<long long>(c.state.critic.size()));
      std::printf("updates: %lld\nglobal steps: %lld\nenvironments: %zu\npcgrad: %s\n", c.state.update,
                  c.state.global_step, c.state.envs.size(), c.config.train.ppo.pcgrad_enabled ? "on" : "off");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
