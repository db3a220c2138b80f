#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fluxswarm/io/checkpoint.hpp"
#include "fluxswarm/io/config.hpp"
#include "fluxswarm/io/run.hpp"
#include "fluxswarm/io/run_logger.hpp"
#include "fluxswarm/io/snapshot.hpp"

namespace fs = std::filesystem;
using namespace fluxswarm;
using namespace fluxswarm::io;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fluxswarm_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_file(p); }

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

RunConfig smoke(const fs::path& out, const std::string& name) {
  RunConfig c = parse_config(
      "[run]\nsnapshot_every = 8\nseed = 1\n[flow]\ndx = 2.0e-4\n"
      "[ppo]\nn_envs = 2\nrollout_length = 16\ntotal_steps_per_env = 32\ncheckpoint_every = 1\n");
  c.output_dir = out.string();
  c.run_name = name;
  return c;
}

}  // namespace

TEST(Config, EmptyFileGivesReferenceDefaults) {
  const RunConfig c = parse_config("");
  const auto& e = c.train.env;
  const auto& p = c.train.ppo;
  EXPECT_EQ(e.fluid.rho, 1060.0);
  EXPECT_EQ(e.fluid.mu, 3e-3);
  EXPECT_EQ(e.width, 2e-3);
  EXPECT_EQ(e.length, 0.1);
  EXPECT_EQ(e.dx, 1e-4);
  EXPECT_EQ(e.dt, 5e-3);
  EXPECT_EQ(e.substeps, 20);
  EXPECT_EQ(e.swarm.n_agents(), 16);
  EXPECT_EQ(e.swarm.radius, 2.5e-4);
  EXPECT_EQ(e.swarm.f_max, 8.5e-7);
  EXPECT_EQ(e.x_success, 0.020);
  EXPECT_EQ(e.x_failure, 0.080);
  EXPECT_EQ(e.t_max, 10.0);
  EXPECT_EQ(p.gamma, 0.95);
  EXPECT_EQ(p.lambda, 0.95);
  EXPECT_EQ(p.clip, 0.2);
  EXPECT_EQ(p.lr, 1e-3);
  EXPECT_EQ(p.entropy_coef, 0.01);
  EXPECT_EQ(p.n_envs, 4);
  EXPECT_EQ(p.total_steps_per_env, 27000);
  EXPECT_EQ(p.epochs, 4);
  EXPECT_EQ(p.rollout_length, 16);
  EXPECT_EQ(p.minibatch_size, 4);
  EXPECT_TRUE(p.pcgrad_enabled);
  EXPECT_EQ(p.checkpoint_every, 50);
  const auto g = e.grid();
  EXPECT_EQ(g.nx, 1000);
  EXPECT_EQ(g.ny, 20);
}

TEST(Config, UnknownKeysAndTypesAreParseErrors) {
  EXPECT_THROW(parse_config("foo = 1\n"), ParseError);
  try {
    parse_config("[flow]\ndx = 1.0e-4\nfoo = 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("flow.foo"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("[ppo]\nepochs = 2.5\n"), ParseError);
  EXPECT_THROW(parse_config("[ppo]\npcgrad = 1\n"), ParseError);
  try {
    parse_config("[env]\ndt = = 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, ValidationNamesTheInvariant) {
  // 0.25 mm: integral grid, Courant 0.4 and small diffusion number.
  EXPECT_NO_THROW(parse_config("[flow]\ndx = 2.5e-4\n"));
  // 0.3 mm does not tile a 2 mm channel.
  try {
    parse_config("[flow]\ndx = 3.0e-4\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("grid"), std::string::npos);
  }
  // 0.08 mm: peak inflow Courant number 1.25.
  try {
    parse_config("[flow]\ndx = 8.0e-5\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Courant"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("[flow]\ndx = 2.0e-5\n"), ValidationError);
  EXPECT_THROW(parse_config("[ppo]\ngamma = 1.5\n"), ValidationError);
  EXPECT_THROW(parse_config("[swarm]\nrows = 3\nspacing = 1.0e-3\n"), ValidationError);
}

TEST(Config, WriteParseRoundTrip) {
  RunConfig c = parse_config("[run]\nname = \"a \\\"b\\\"\"\nseed = 7\n[flow]\ndx = 2.0e-4\n[ppo]\npcgrad = false\nlr = 3.3e-4\n");
  const std::string text = write_config(c);
  const RunConfig d = parse_config(text);
  EXPECT_EQ(write_config(d), text);
  EXPECT_EQ(d.run_name, "a \"b\"");
  EXPECT_EQ(d.train.ppo.lr, 3.3e-4);
  EXPECT_FALSE(d.train.ppo.pcgrad_enabled);
  EXPECT_EQ(d.train.ppo.seed, 7u);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"smoke.toml", "coarse.toml", "paper.toml"}) {
    EXPECT_NO_THROW(load_config(fs::path(FLUXSWARM_SOURCE_DIR) / "configs" / name)) << name;
  }
  // The full-resolution config spells out the defaults.
  RunConfig defaults = parse_config("");
  defaults.run_name = "paper";
  defaults.snapshot_every = 1000;
  EXPECT_EQ(write_config(load_config(fs::path(FLUXSWARM_SOURCE_DIR) / "configs" / "paper.toml")), write_config(defaults));
  EXPECT_THROW(load_config("/nonexistent/config.toml"), IoError);
}

TEST(Snapshot, SizesSidecarAndOverwrite) {
  const fs::path dir = scratch("snapshot");
  env::EnvConfig ec;
  ec.dx = 2e-4;
  env::Environment e(ec);
  e.step(std::vector<Vec2>(16, Vec2{-1.0, 0.0}));
  const auto g = e.grid();
  write_snapshot(e.fluid(), g, e.agents(), e.time(), 0, dir);
  const fs::path bin = dir / (snapshot_stem(0) + ".bin");
  EXPECT_EQ(fs::file_size(bin), static_cast<std::uintmax_t>((g.nx + 1) * g.ny * 4 + g.nx * (g.ny + 1) * 4 + g.nx * g.ny * 4));
  const std::string first = slurp(bin) + slurp(dir / (snapshot_stem(0) + ".json"));
  write_snapshot(e.fluid(), g, e.agents(), e.time(), 0, dir);
  EXPECT_EQ(slurp(bin) + slurp(dir / (snapshot_stem(0) + ".json")), first);

  const Snapshot s = read_snapshot(dir / (snapshot_stem(0) + ".json"));
  EXPECT_EQ(s.nx, g.nx);
  EXPECT_EQ(s.ny, g.ny);
  EXPECT_EQ(s.dx, g.dx);
  EXPECT_EQ(s.t, e.time());
  ASSERT_EQ(s.u.size(), e.fluid().vel.u.size());
  for (std::size_t k = 0; k < s.u.size(); ++k) EXPECT_EQ(s.u[k], static_cast<float>(e.fluid().vel.u.flat()[k]));
  for (std::size_t k = 0; k < s.p.size(); ++k) EXPECT_EQ(s.p[k], static_cast<float>(e.fluid().pressure.p.flat()[k]));
  ASSERT_EQ(s.agents.size(), 16u);
  EXPECT_EQ(s.agents[3].x, e.agents()[3].pos.x);
  EXPECT_EQ(count_lines(dir / (snapshot_stem(0) + ".csv")), 17u);
}

TEST(Render, PpmHeaderColoursAndDisks) {
  Snapshot s;
  s.nx = 6;
  s.ny = 4;
  s.dx = 1.0;
  s.u.assign(7 * 4, 0.0f);
  s.v.assign(6 * 5, 0.0f);
  s.p.assign(24, 0.0f);
  s.agents.push_back({0, 4.5, 2.5, 0.6});
  const std::string img = render_ppm(s);
  const std::string header = "P6\n6 4\n255\n";
  ASSERT_EQ(img.substr(0, header.size()), header);
  EXPECT_EQ(img.size(), header.size() + 6 * 4 * 3);
  EXPECT_EQ((diverging_color(0.0)), (std::array<unsigned char, 3>{255, 255, 255}));
  EXPECT_EQ((diverging_color(kRenderUMin)), (std::array<unsigned char, 3>{33, 102, 172}));
  EXPECT_EQ((diverging_color(kRenderUMax)), (std::array<unsigned char, 3>{178, 24, 43}));
  EXPECT_EQ(diverging_color(5.0), diverging_color(kRenderUMax));
  // Cell (4, 2) holds the disk centre; image row 1 is j = 2.
  const std::size_t px = header.size() + (1 * 6 + 4) * 3;
  EXPECT_EQ(static_cast<unsigned char>(img[px]), 40);
  EXPECT_EQ(static_cast<unsigned char>(img[header.size()]), 255);
}

TEST(Logs, CsvHeadersAreStable) {
  std::ostringstream r, e, u;
  write_rewards_header(r);
  write_episodes_header(e);
  write_update_stats_header(u);
  EXPECT_EQ(r.str(), "global_step,env_id,episode_id,step_in_episode,mean_r_progress,mean_r_energy,mean_r_smooth,status\n");
  EXPECT_EQ(e.str(), "global_step,env_id,episode_id,length,norm_r_progress,norm_r_energy,norm_r_smooth,status\n");
  EXPECT_EQ(u.str(),
            "update,global_step,loss_progress,loss_energy,loss_smooth,critic_loss,entropy,clip_fraction,"
            "cos_progress_energy,cos_progress_smooth,cos_energy_smooth,min_cos_progress_energy,"
            "min_cos_progress_smooth,min_cos_energy_smooth,conflicts\n");
  std::ostringstream row;
  write_reward_row(row, {12, 1, 3, 4, {0.5, -0.25, 1.0}, "failure"});
  EXPECT_EQ(row.str(), "12,1,3,4,0.5,-0.25,1,failure\n");
}

TEST(Run, SmokeTrainingWritesRunDirectoryAndResumes) {
  const fs::path out = scratch("run");
  const RunConfig cfg = smoke(out, "a");
  const fs::path last = run_training(cfg);
  const RunDir dir = run_dir_for(cfg);
  EXPECT_EQ(last, dir.checkpoints() / checkpoint_name(2));
  EXPECT_EQ(count_lines(dir.rewards()), 65u);
  EXPECT_EQ(count_lines(dir.update_stats()), 3u);
  EXPECT_TRUE(fs::exists(dir.checkpoints() / checkpoint_name(1) / "header.json"));
  EXPECT_EQ(slurp(dir.config()), write_config(cfg));
  // Env 0 takes 32 steps: snapshots at its steps 8, 16, 24 and 32.
  int snaps = 0;
  for (const auto& f : fs::directory_iterator(dir.snapshots())) snaps += f.path().extension() == ".json";
  EXPECT_EQ(snaps, 4);

  // Same seed: byte-identical logs and checkpoints.
  const RunConfig cfg_b = smoke(out, "b");
  run_training(cfg_b);
  const RunDir db = run_dir_for(cfg_b);
  for (const char* f : {"rewards.csv", "episodes.csv", "update_stats.csv"})
    EXPECT_EQ(slurp(dir.root / f), slurp(db.root / f)) << f;
  for (const char* f : {"params.bin", "envs.bin", "header.json"})
    EXPECT_EQ(slurp(last / f), slurp(db.checkpoints() / checkpoint_name(2) / f)) << f;

  // Resuming from update 1 reproduces update 2 bit for bit.
  const RunConfig cfg_c = smoke(out, "c");
  fs::create_directories(run_dir_for(cfg_c).root);
  fs::copy_file(dir.config(), run_dir_for(cfg_c).config());
  run_training(cfg_c, 1, dir.checkpoints() / checkpoint_name(1));
  const fs::path resumed = run_dir_for(cfg_c).checkpoints() / checkpoint_name(2);
  EXPECT_EQ(slurp(resumed / "params.bin"), slurp(last / "params.bin"));
  EXPECT_EQ(slurp(resumed / "envs.bin"), slurp(last / "envs.bin"));
}

TEST(Checkpoint, RoundTripRestoresTrainer) {
  const fs::path out = scratch("ckpt");
  const RunConfig cfg = smoke(out, "x");
  marl::Trainer tr(cfg.train);
  tr.iterate();
  save_checkpoint(out / "ck", cfg, tr);
  const Checkpoint c = load_checkpoint(out / "ck");
  EXPECT_EQ(c.actor_sizes, (std::vector<int>{8, 256, 256, 4}));
  EXPECT_EQ(c.critic_sizes, (std::vector<int>{128, 256, 256, 3}));
  EXPECT_EQ(c.state.update, 1);
  EXPECT_EQ(c.state.global_step, 32);
  marl::Trainer back = restore_trainer(c);
  EXPECT_EQ(back.actor().net.params(), tr.actor().net.params());
  for (int e = 0; e < 2; ++e) {
    EXPECT_EQ(back.envs()[e].agents(), tr.envs()[e].agents());
    EXPECT_EQ(back.envs()[e].fluid().vel, tr.envs()[e].fluid().vel);
  }
  tr.iterate();
  back.iterate();
  EXPECT_EQ(back.actor().net.params(), tr.actor().net.params());
  EXPECT_EQ(back.critic().net.params(), tr.critic().net.params());
}
