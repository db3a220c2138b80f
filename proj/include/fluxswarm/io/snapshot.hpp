#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fluxswarm/flow/grid.hpp"
#include "fluxswarm/io/binary.hpp"
#include "fluxswarm/swarm/agent.hpp"
#include "fluxswarm/swarm/trajectory.hpp"

namespace fluxswarm::io {

/// A field snapshot as stored on disk (32-bit floats, row-major i*extent1+j).
struct Snapshot {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double t = 0.0;
  long long step = 0;
  std::vector<float> u;  // (nx+1) × ny
  std::vector<float> v;  // nx × (ny+1)
  std::vector<float> p;  // nx × ny
  struct Disk {
    int id;
    double x, y, r;
  };
  std::vector<Disk> agents;
};

inline std::string snapshot_stem(long long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%010lld", step);
  return buf;
}

inline nlohmann::json snapshot_sidecar(const flow::GridSpec& g, double t, long long step,
                                       const std::vector<swarm::AgentState>& agents, const std::string& bin_name) {
  nlohmann::json j;
  j["nx"] = g.nx;
  j["ny"] = g.ny;
  j["dx"] = g.dx;
  j["t"] = t;
  j["step"] = step;
  j["file"] = bin_name;
  j["dtype"] = "float32";
  j["endianness"] = "little";
  j["order"] = "row-major, index i*extent1 + j";
  long long offset = 0;
  auto arr = nlohmann::json::array();
  auto add = [&](const char* name, int n0, int n1) {
    arr.push_back({{"name", name}, {"shape", {n0, n1}}, {"offset_bytes", offset}});
    offset += 4LL * n0 * n1;
  };
  add("u", g.nx + 1, g.ny);
  add("v", g.nx, g.ny + 1);
  add("p", g.nx, g.ny);
  j["arrays"] = arr;
  auto ag = nlohmann::json::array();
  for (const auto& a : agents) ag.push_back({{"id", a.id}, {"x", a.pos.x}, {"y", a.pos.y}, {"r", a.radius}});
  j["agents"] = ag;
  return j;
}

/// Writes <stem>.bin (u, v, p as float32), <stem>.json and <stem>.csv (one
/// trajectory row per agent) into `dir`; existing files are replaced.
inline std::filesystem::path write_snapshot(const flow::FluidState& fluid, const flow::GridSpec& g,
                                            const std::vector<swarm::AgentState>& agents, double t, long long step,
                                            const std::filesystem::path& dir, const std::vector<Vec2>& actions = {},
                                            const std::vector<swarm::ForceBreakdown>& forces = {}) {
  std::filesystem::create_directories(dir);
  const std::string stem = snapshot_stem(step);
  std::string bytes;
  bytes.reserve(4 * (fluid.vel.u.size() + fluid.vel.v.size() + fluid.pressure.p.size()));
  for (double x : fluid.vel.u.flat()) append_f32(bytes, static_cast<float>(x));
  for (double x : fluid.vel.v.flat()) append_f32(bytes, static_cast<float>(x));
  for (double x : fluid.pressure.p.flat()) append_f32(bytes, static_cast<float>(x));
  write_file(dir / (stem + ".bin"), bytes);
  write_file(dir / (stem + ".json"), snapshot_sidecar(g, t, step, agents, stem + ".bin").dump(2) + "\n");
  std::ostringstream csv;
  swarm::write_trajectory_header(csv);
  swarm::write_trajectory_rows(csv, step, t, agents, actions, forces);
  write_file(dir / (stem + ".csv"), csv.str());
  return dir / (stem + ".json");
}

/// Reads a snapshot from its JSON sidecar (or the .bin next to it).
inline Snapshot read_snapshot(std::filesystem::path path) {
  if (path.extension() == ".bin") path.replace_extension(".json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("snapshot sidecar '" + path.string() + "': " + e.what());
  }
  Snapshot s;
  try {
    s.nx = j.at("nx").get<int>();
    s.ny = j.at("ny").get<int>();
    s.dx = j.at("dx").get<double>();
    s.t = j.at("t").get<double>();
    s.step = j.value("step", 0LL);
    for (const auto& a : j.value("agents", nlohmann::json::array()))
      s.agents.push_back({a.at("id").get<int>(), a.at("x").get<double>(), a.at("y").get<double>(), a.at("r").get<double>()});
    const std::string bin = read_file(path.parent_path() / j.at("file").get<std::string>());
    const std::size_t nu = static_cast<std::size_t>(s.nx + 1) * s.ny;
    const std::size_t nv = static_cast<std::size_t>(s.nx) * (s.ny + 1);
    const std::size_t np = static_cast<std::size_t>(s.nx) * s.ny;
    if (bin.size() != 4 * (nu + nv + np)) throw IoError("snapshot binary has the wrong size");
    std::size_t pos = 0;
    auto take = [&](std::vector<float>& out, std::size_t n) {
      out.resize(n);
      for (auto& x : out) x = read_f32(bin, pos);
    };
    take(s.u, nu);
    take(s.v, nv);
    take(s.p, np);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("snapshot sidecar '" + path.string() + "': " + e.what());
  }
  return s;
}

inline constexpr double kRenderUMin = -0.45;
inline constexpr double kRenderUMax = 0.75;

/// Blue (u_min) through white (0) to red (u_max).
inline std::array<unsigned char, 3> diverging_color(double u) {
  auto lerp = [](double a, double b, double s) { return static_cast<unsigned char>(std::lround(a + (b - a) * s)); };
  if (u < 0.0) {
    const double s = std::clamp(u / kRenderUMin, 0.0, 1.0);
    return {lerp(255, 33, s), lerp(255, 102, s), lerp(255, 172, s)};
  }
  const double s = std::clamp(u / kRenderUMax, 0.0, 1.0);
  return {lerp(255, 178, s), lerp(255, 24, s), lerp(255, 43, s)};
}

/// P6 image, one pixel per cell (nx wide, ny tall, top row = top wall),
/// coloured by cell-centred x-velocity; agents are drawn as filled dark disks.
inline std::string render_ppm(const Snapshot& s) {
  std::string out = "P6\n" + std::to_string(s.nx) + " " + std::to_string(s.ny) + "\n255\n";
  for (int row = 0; row < s.ny; ++row) {
    const int j = s.ny - 1 - row;
    for (int i = 0; i < s.nx; ++i) {
      const double u = 0.5 * (s.u[static_cast<std::size_t>(i) * s.ny + j] + s.u[static_cast<std::size_t>(i + 1) * s.ny + j]);
      auto c = diverging_color(u);
      const double cx = (i + 0.5) * s.dx, cy = (j + 0.5) * s.dx;
      for (const auto& a : s.agents) {
        if ((cx - a.x) * (cx - a.x) + (cy - a.y) * (cy - a.y) <= a.r * a.r) c = {40, 40, 40};
      }
      out.append(reinterpret_cast<const char*>(c.data()), 3);
    }
  }
  return out;
}

}  // namespace fluxswarm::io
