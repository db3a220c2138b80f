#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "fluxswarm/io/binary.hpp"
#include "fluxswarm/io/config.hpp"
#include "fluxswarm/marl/trainer.hpp"

namespace fluxswarm::io {

inline constexpr int kCheckpointFormat = 1;
inline constexpr int kAgentRecord = 9;  // id, x, y, vx, vy, radius, mass, prev_ax, prev_ay

/// A checkpoint directory holds header.json, params.bin (network parameters
/// and Adam moments, little-endian float64), envs.bin (environment states)
/// and config.toml (the run configuration).
struct Checkpoint {
  RunConfig config;
  marl::TrainerState state;
  std::vector<int> actor_sizes;
  std::vector<int> critic_sizes;
};

inline std::string checkpoint_name(long long update) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%08lld", update);
  return buf;
}

namespace detail {

inline void append_vector(std::string& out, const Eigen::VectorXd& v) {
  for (double x : v) append_f64(out, x);
}

inline Eigen::VectorXd read_vector(const std::string& in, std::size_t& pos, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (auto& x : v) x = read_f64(in, pos);
  return v;
}

inline void read_field(const std::string& in, std::size_t& pos, Field2D& f) {
  for (double& x : f.flat()) x = read_f64(in, pos);
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& dir, const RunConfig& cfg, const marl::Trainer& tr) {
  std::filesystem::create_directories(dir);
  const marl::TrainerState s = tr.save_state();
  std::string params;
  nlohmann::json off;
  auto mark = [&](const char* name, const Eigen::VectorXd& v) {
    off[name] = {{"offset", params.size() / 8}, {"count", v.size()}};
    detail::append_vector(params, v);
  };
  mark("actor", s.actor);
  mark("critic", s.critic);
  mark("actor_adam_m", s.actor_opt.m);
  mark("actor_adam_v", s.actor_opt.v);
  mark("critic_adam_m", s.critic_opt.m);
  mark("critic_adam_v", s.critic_opt.v);

  std::string envs;
  auto env_json = nlohmann::json::array();
  for (std::size_t e = 0; e < s.envs.size(); ++e) {
    const auto& es = s.envs[e];
    nlohmann::json j;
    j["offset"] = envs.size() / 8;
    j["n_agents"] = es.agents.size();
    j["step"] = es.step;
    j["episode"] = es.episode;
    j["status"] = static_cast<int>(es.status.status);
    j["cause"] = static_cast<int>(es.status.cause);
    j["rng"] = es.rng_state;
    j["episode_length"] = s.episodes[e].length;
    for (double x : es.fluid.vel.u.flat()) append_f64(envs, x);
    for (double x : es.fluid.vel.v.flat()) append_f64(envs, x);
    for (double x : es.fluid.pressure.p.flat()) append_f64(envs, x);
    for (const auto& a : es.agents) {
      for (double x : {static_cast<double>(a.id), a.pos.x, a.pos.y, a.vel.x, a.vel.y, a.radius, a.mass, a.prev_action.x,
                       a.prev_action.y})
        append_f64(envs, x);
    }
    for (double x : s.episodes[e].sums) append_f64(envs, x);
    env_json.push_back(j);
  }

  nlohmann::json h;
  h["format"] = kCheckpointFormat;
  h["dtype"] = "float64";
  h["endianness"] = "little";
  h["architecture"] = {{"actor", {{"sizes", tr.actor().net.sizes()}, {"hidden_activation", "tanh"}, {"output", "linear: mean[2], log_std[2]"}}},
                       {"critic", {{"sizes", tr.critic().net.sizes()}, {"hidden_activation", "tanh"}, {"output", "linear: progress, energy, smoothness"}}}};
  h["update"] = s.update;
  h["global_step"] = s.global_step;
  h["params_file"] = "params.bin";
  h["params"] = off;
  h["adam_steps"] = {{"actor", s.actor_opt.step}, {"critic", s.critic_opt.step}};
  h["rng"] = s.rng;
  h["pcgrad_rng"] = s.pcgrad_rng;
  h["envs_file"] = "envs.bin";
  h["envs"] = env_json;
  write_file(dir / "params.bin", params);
  write_file(dir / "envs.bin", envs);
  write_file(dir / "config.toml", write_config(cfg));
  write_file(dir / "header.json", h.dump(2) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Checkpoint c;
  c.config = load_config(dir / "config.toml");
  try {
    const auto h = nlohmann::json::parse(read_file(dir / "header.json"));
    if (h.at("format").get<int>() != kCheckpointFormat) throw IoError("unsupported checkpoint format");
    c.actor_sizes = h.at("architecture").at("actor").at("sizes").get<std::vector<int>>();
    c.critic_sizes = h.at("architecture").at("critic").at("sizes").get<std::vector<int>>();
    const std::string params = read_file(dir / h.at("params_file").get<std::string>());
    auto vec = [&](const char* name) {
      const auto& o = h.at("params").at(name);
      std::size_t pos = o.at("offset").get<std::size_t>() * 8;
      return detail::read_vector(params, pos, o.at("count").get<Eigen::Index>());
    };
    auto& s = c.state;
    s.actor = vec("actor");
    s.critic = vec("critic");
    s.actor_opt.m = vec("actor_adam_m");
    s.actor_opt.v = vec("actor_adam_v");
    s.critic_opt.m = vec("critic_adam_m");
    s.critic_opt.v = vec("critic_adam_v");
    s.actor_opt.step = h.at("adam_steps").at("actor").get<long long>();
    s.critic_opt.step = h.at("adam_steps").at("critic").get<long long>();
    s.rng = h.at("rng").get<std::string>();
    s.pcgrad_rng = h.at("pcgrad_rng").get<std::string>();
    s.update = h.at("update").get<long long>();
    s.global_step = h.at("global_step").get<long long>();

    const std::string envs = read_file(dir / h.at("envs_file").get<std::string>());
    const auto g = c.config.train.env.grid();
    for (const auto& j : h.at("envs")) {
      env::EnvState es;
      es.fluid = flow::FluidState(g);
      es.step = j.at("step").get<int>();
      es.episode = j.at("episode").get<long long>();
      es.status = {static_cast<env::Status>(j.at("status").get<int>()), static_cast<env::TruncationCause>(j.at("cause").get<int>())};
      es.rng_state = j.at("rng").get<std::string>();
      std::size_t pos = j.at("offset").get<std::size_t>() * 8;
      detail::read_field(envs, pos, es.fluid.vel.u);
      detail::read_field(envs, pos, es.fluid.vel.v);
      detail::read_field(envs, pos, es.fluid.pressure.p);
      const auto n = j.at("n_agents").get<std::size_t>();
      for (std::size_t k = 0; k < n; ++k) {
        swarm::AgentState a;
        a.id = static_cast<int>(read_f64(envs, pos));
        a.pos.x = read_f64(envs, pos);
        a.pos.y = read_f64(envs, pos);
        a.vel.x = read_f64(envs, pos);
        a.vel.y = read_f64(envs, pos);
        a.radius = read_f64(envs, pos);
        a.mass = read_f64(envs, pos);
        a.prev_action.x = read_f64(envs, pos);
        a.prev_action.y = read_f64(envs, pos);
        es.agents.push_back(a);
      }
      marl::EpisodeAccumulator acc;
      for (double& x : acc.sums) x = read_f64(envs, pos);
      acc.length = j.at("episode_length").get<int>();
      s.envs.push_back(std::move(es));
      s.episodes.push_back(acc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint '" + dir.string() + "': " + e.what());
  }
  return c;
}

/// Rebuilds a trainer from a checkpoint.
inline marl::Trainer restore_trainer(const Checkpoint& c, int threads = 1) {
  marl::Trainer tr(c.config.train, threads);
  if (tr.actor().net.sizes() != c.actor_sizes || tr.critic().net.sizes() != c.critic_sizes)
    throw IoError("checkpoint architecture does not match its configuration");
  tr.load_state(c.state);
  return tr;
}

}  // namespace fluxswarm::io
