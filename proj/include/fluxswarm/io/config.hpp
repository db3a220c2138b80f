#pragma once

#include <toml.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fluxswarm/core/csv.hpp"
#include "fluxswarm/core/errors.hpp"
#include "fluxswarm/marl/trainer.hpp"

namespace fluxswarm::io {

/// Everything a run needs. Defaults reproduce the reference configuration.
struct RunConfig {
  marl::TrainConfig train;
  std::string run_name = "run";
  std::string output_dir = "runs";
  long long snapshot_every = 0;  // env steps of environment 0; 0 disables snapshots
  std::uint64_t seed = 0;

  void validate() const {
    train.validate();
    if (snapshot_every < 0) throw ValidationError("run: snapshot_every must be >= 0");
    if (run_name.empty()) throw ValidationError("run: name must not be empty");
  }
};

namespace detail {

inline std::string where(const toml::node& n) {
  const auto& src = n.source();
  return "line " + std::to_string(src.begin.line);
}

/// Reads known keys out of one table and rejects everything else.
class StrictTable {
 public:
  StrictTable(const toml::table& t, std::string name) : t_(t), name_(std::move(name)) {}

  void number(const char* key, double& out) {
    if (const auto* n = take(key)) {
      if (const auto* f = n->as_floating_point()) out = f->get();
      else if (const auto* i = n->as_integer()) out = static_cast<double>(i->get());
      else fail(*n, key, "a number");
    }
  }
  void integer(const char* key, int& out) {
    long long v = out;
    integer(key, v);
    out = static_cast<int>(v);
  }
  void integer(const char* key, long long& out) {
    if (const auto* n = take(key)) {
      if (const auto* i = n->as_integer()) out = i->get();
      else fail(*n, key, "an integer");
    }
  }
  void unsigned_integer(const char* key, std::uint64_t& out) {
    if (const auto* n = take(key)) {
      const auto* i = n->as_integer();
      if (!i || i->get() < 0) fail(*n, key, "a non-negative integer");
      out = static_cast<std::uint64_t>(i->get());
    }
  }
  void boolean(const char* key, bool& out) {
    if (const auto* n = take(key)) {
      if (const auto* b = n->as_boolean()) out = b->get();
      else fail(*n, key, "a boolean");
    }
  }
  void string(const char* key, std::string& out) {
    if (const auto* n = take(key)) {
      if (const auto* s = n->as_string()) out = s->get();
      else fail(*n, key, "a string");
    }
  }
  void numbers(const char* key, std::vector<double>& out) {
    if (const auto* n = take(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(*n, key, "an array of numbers");
      out.clear();
      for (const auto& e : *arr) {
        if (const auto* f = e.as_floating_point()) out.push_back(f->get());
        else if (const auto* i = e.as_integer()) out.push_back(static_cast<double>(i->get()));
        else fail(e, key, "an array of numbers");
      }
    }
  }
  /// Sub-table, or null when absent.
  const toml::table* table(const char* key) {
    const auto* n = take(key);
    if (!n) return nullptr;
    if (!n->is_table()) fail(*n, key, "a table");
    return n->as_table();
  }

  /// Throws on the first key that was never read.
  void finish() const {
    for (const auto& [k, v] : t_) {
      if (!seen_.contains(std::string(k.str())))
        throw ParseError("config " + where(v) + ": unknown key '" + prefix() + std::string(k.str()) + "'");
    }
  }

 private:
  const toml::node* take(const char* key) {
    seen_[key] = true;
    return t_.get(key);
  }
  [[noreturn]] void fail(const toml::node& n, const char* key, const char* what) const {
    throw ParseError("config " + where(n) + ": '" + prefix() + key + "' must be " + what);
  }
  std::string prefix() const { return name_.empty() ? "" : name_ + "."; }

  const toml::table& t_;
  std::string name_;
  std::map<std::string, bool> seen_;
};

inline void read_section(StrictTable& root, const char* name, const std::function<void(StrictTable&)>& body) {
  if (const auto* t = root.table(name)) {
    StrictTable s(*t, name);
    body(s);
    s.finish();
  }
}

}  // namespace detail

/// Parses TOML text into a validated RunConfig. Absent keys keep their
/// defaults; unknown keys and wrong types raise ParseError with a line number.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  toml::table root_table;
  try {
    root_table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ParseError(source + ": line " + std::to_string(e.source().begin.line) + ": " + std::string(e.description()));
  }
  RunConfig rc;
  auto& env = rc.train.env;
  auto& ppo = rc.train.ppo;
  detail::StrictTable root(root_table, "");
  detail::read_section(root, "run", [&](detail::StrictTable& t) {
    t.string("name", rc.run_name);
    t.string("output_dir", rc.output_dir);
    t.integer("snapshot_every", rc.snapshot_every);
    t.unsigned_integer("seed", rc.seed);
  });
  detail::read_section(root, "flow", [&](detail::StrictTable& t) {
    t.number("length", env.length);
    t.number("width", env.width);
    t.number("dx", env.dx);
    t.number("rho", env.fluid.rho);
    t.number("mu", env.fluid.mu);
    t.number("divergence_tol", env.solver.divergence_tol);
    t.number("blowup_speed", env.solver.blowup_speed);
    t.number("courant_limit", env.solver.courant_limit);
    if (const auto* w = t.table("waveform")) {
      detail::StrictTable ws(*w, "flow.waveform");
      std::vector<double> durations, velocities;
      for (const auto& ph : env.waveform.phases()) {
        durations.push_back(ph.duration);
        velocities.push_back(ph.velocity);
      }
      double ramp = env.waveform.ramp_time();
      ws.numbers("durations", durations);
      ws.numbers("velocities", velocities);
      ws.number("ramp_time", ramp);
      ws.finish();
      if (durations.size() != velocities.size() || durations.empty())
        throw ValidationError("flow.waveform: durations and velocities must be non-empty and of equal length");
      std::vector<flow::WaveformPhase> phases;
      for (std::size_t k = 0; k < durations.size(); ++k) phases.push_back({durations[k], velocities[k]});
      env.waveform = flow::InflowWaveform(std::move(phases), ramp);
    }
  });
  detail::read_section(root, "swarm", [&](detail::StrictTable& t) {
    t.integer("rows", env.swarm.rows);
    t.integer("cols", env.swarm.cols);
    t.number("spacing", env.swarm.spacing);
    t.number("radius", env.swarm.radius);
    t.number("rho_solid", env.swarm.rho_solid);
    t.number("f_max", env.swarm.f_max);
    t.number("center_x", env.swarm.center_x);
  });
  detail::read_section(root, "env", [&](detail::StrictTable& t) {
    t.number("dt", env.dt);
    t.integer("substeps", env.substeps);
    t.number("t_max", env.t_max);
    t.number("x_success", env.x_success);
    t.number("x_failure", env.x_failure);
    t.number("metric_margin", env.metric_margin);
    t.number("u_ref", env.u_ref);
  });
  detail::read_section(root, "ppo", [&](detail::StrictTable& t) {
    t.number("clip", ppo.clip);
    t.number("entropy_coef", ppo.entropy_coef);
    t.number("gamma", ppo.gamma);
    t.number("lambda", ppo.lambda);
    t.number("lr", ppo.lr);
    t.integer("epochs", ppo.epochs);
    t.integer("rollout_length", ppo.rollout_length);
    t.integer("minibatch_size", ppo.minibatch_size);
    t.integer("n_envs", ppo.n_envs);
    t.integer("total_steps_per_env", ppo.total_steps_per_env);
    t.boolean("pcgrad", ppo.pcgrad_enabled);
    t.integer("checkpoint_every", ppo.checkpoint_every);
  });
  root.finish();
  ppo.seed = rc.seed;
  env.seed = rc.seed;
  rc.validate();
  return rc;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

/// Canonical TOML for a config; parse_config(write_config(c)) reproduces c.
inline std::string write_config(const RunConfig& rc) {
  const auto& env = rc.train.env;
  const auto& ppo = rc.train.ppo;
  std::ostringstream os;
  auto num = [](double v) {
    std::string s = format_double(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  };
  auto quoted = [](const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + "\"";
  };
  os << "[run]\n"
     << "name = " << quoted(rc.run_name) << "\n"
     << "output_dir = " << quoted(rc.output_dir) << "\n"
     << "snapshot_every = " << rc.snapshot_every << "\n"
     << "seed = " << rc.seed << "\n\n";
  os << "[flow]\n"
     << "length = " << num(env.length) << "\n"
     << "width = " << num(env.width) << "\n"
     << "dx = " << num(env.dx) << "\n"
     << "rho = " << num(env.fluid.rho) << "\n"
     << "mu = " << num(env.fluid.mu) << "\n"
     << "divergence_tol = " << num(env.solver.divergence_tol) << "\n"
     << "blowup_speed = " << num(env.solver.blowup_speed) << "\n"
     << "courant_limit = " << num(env.solver.courant_limit) << "\n\n";
  os << "[flow.waveform]\n";
  std::string durations, velocities;
  for (const auto& ph : env.waveform.phases()) {
    durations += (durations.empty() ? "" : ", ") + num(ph.duration);
    velocities += (velocities.empty() ? "" : ", ") + num(ph.velocity);
  }
  os << "durations = [" << durations << "]\n"
     << "velocities = [" << velocities << "]\n"
     << "ramp_time = " << num(env.waveform.ramp_time()) << "\n\n";
  os << "[swarm]\n"
     << "rows = " << env.swarm.rows << "\n"
     << "cols = " << env.swarm.cols << "\n"
     << "spacing = " << num(env.swarm.spacing) << "\n"
     << "radius = " << num(env.swarm.radius) << "\n"
     << "rho_solid = " << num(env.swarm.rho_solid) << "\n"
     << "f_max = " << num(env.swarm.f_max) << "\n"
     << "center_x = " << num(env.swarm.center_x) << "\n\n";
  os << "[env]\n"
     << "dt = " << num(env.dt) << "\n"
     << "substeps = " << env.substeps << "\n"
     << "t_max = " << num(env.t_max) << "\n"
     << "x_success = " << num(env.x_success) << "\n"
     << "x_failure = " << num(env.x_failure) << "\n"
     << "metric_margin = " << num(env.metric_margin) << "\n"
     << "u_ref = " << num(env.u_ref) << "\n\n";
  os << "[ppo]\n"
     << "clip = " << num(ppo.clip) << "\n"
     << "entropy_coef = " << num(ppo.entropy_coef) << "\n"
     << "gamma = " << num(ppo.gamma) << "\n"
     << "lambda = " << num(ppo.lambda) << "\n"
     << "lr = " << num(ppo.lr) << "\n"
     << "epochs = " << ppo.epochs << "\n"
     << "rollout_length = " << ppo.rollout_length << "\n"
     << "minibatch_size = " << ppo.minibatch_size << "\n"
     << "n_envs = " << ppo.n_envs << "\n"
     << "total_steps_per_env = " << ppo.total_steps_per_env << "\n"
     << "pcgrad = " << (ppo.pcgrad_enabled ? "true" : "false") << "\n"
     << "checkpoint_every = " << ppo.checkpoint_every << "\n";
  return os.str();
}

}  // namespace fluxswarm::io
