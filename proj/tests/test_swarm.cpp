#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fluxswarm/swarm/agent.hpp"
#include "fluxswarm/swarm/collisions.hpp"
#include "fluxswarm/swarm/coupling.hpp"
#include "fluxswarm/swarm/forces.hpp"
#include "fluxswarm/swarm/trajectory.hpp"

using namespace fluxswarm;
using namespace fluxswarm::swarm;

namespace {

constexpr double kR = 2.5e-4;

AgentState agent_at(double x, double y, int id = 0) {
  AgentState a;
  a.id = id;
  a.pos = {x, y};
  a.radius = kR;
  a.mass = agent_mass(kR, 15120.0);
  return a;
}

flow::GridSpec channel() { return flow::GridSpec{200, 20, 1e-4, 1e-4}; }

}  // namespace

TEST(Mass, Formula) {
  EXPECT_NEAR(agent_mass(kR, 15120.0), 9.896016858807848e-07, 1e-20);
  EXPECT_EQ(agent_mass(kR, 0.0), 0.0);
  EXPECT_NEAR(agent_mass(2 * kR, 15120.0) / agent_mass(kR, 15120.0), 8.0, 1e-12);
}

TEST(Hydro, UniformPressureGivesZero) {
  const auto g = channel();
  flow::PressureField p(g);
  p.p.fill(123.4);
  const Vec2 f = hydrodynamic_force(p, g, agent_at(7.3e-3, 1.05e-3));
  EXPECT_EQ(f.x, 0.0);
  EXPECT_EQ(f.y, 0.0);
}

TEST(Hydro, LinearPressureClosedForm) {
  const auto g = channel();
  const double a = 2500.0;
  flow::PressureField p(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) p.p(i, j) = a * g.cell_center(i, j).x;
  const Vec2 f = hydrodynamic_force(p, g, agent_at(9.87e-3, 0.93e-3));
  EXPECT_LT(f.x, 0.0);
  EXPECT_NEAR(f.x, -std::numbers::pi * kR * kR * a, 1e-12 * std::numbers::pi * kR * kR * a);
  EXPECT_NEAR(f.y, 0.0, 1e-15);
}

TEST(Drag, CoefficientBranches) {
  EXPECT_DOUBLE_EQ(drag_coefficient(0.05), 480.0);
  EXPECT_NEAR(drag_coefficient(1.0), 27.6, 1e-12);
  EXPECT_NEAR(drag_coefficient(999.999999), 0.44, 0.01 * 0.44);
  EXPECT_EQ(drag_coefficient(1000.0), 0.44);
  EXPECT_EQ(drag_coefficient(5e4), 0.44);
}

TEST(Drag, CoefficientPositiveAndDecreasingPerBranch) {
  auto check = [](double lo, double hi) {
    double prev = drag_coefficient(lo);
    for (double re = lo * 1.01; re < hi; re *= 1.01) {
      const double c = drag_coefficient(re);
      EXPECT_GT(c, 0.0);
      EXPECT_LT(c, prev) << re;
      prev = c;
    }
  };
  check(1e-4, 0.1);
  check(0.1, 1000.0);
  // The finite-Re correction switches on at Re = 0.1, a 3.1% upward step.
  EXPECT_NEAR(drag_coefficient(0.1) / drag_coefficient(std::nextafter(0.1, 0.0)), 1.0 + 0.15 * std::pow(0.1, 0.687),
              1e-12);
}

TEST(Drag, WorkedExample) {
  const auto g = channel();
  flow::StaggeredVelocityField vel(g);
  vel.u.fill(0.1);
  const Vec2 f = drag_force(vel, g, agent_at(1e-2, 1e-3), flow::FluidProps{});
  // Re = 17.667, Cd = 2.8238 (evaluated independently of the library).
  EXPECT_NEAR(f.x, 7.483193036967709e-3, 1e-12);
  EXPECT_EQ(f.y, 0.0);
}

TEST(Drag, ComovingIsZeroAndAntisymmetric) {
  const auto g = channel();
  flow::StaggeredVelocityField vel(g);
  vel.u.fill(0.05);
  auto a = agent_at(1e-2, 1e-3);
  a.vel = {0.05, 0.0};
  const Vec2 f0 = drag_force(vel, g, a, flow::FluidProps{});
  EXPECT_EQ(f0.x, 0.0);
  EXPECT_EQ(f0.y, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int k = 0; k < 200; ++k) {
    const Vec2 v{d(rng), d(rng)};
    const Vec2 fp = drag_force_from_relative(v, kR, flow::FluidProps{});
    const Vec2 fm = drag_force_from_relative(-v, kR, flow::FluidProps{});
    EXPECT_EQ(fp.x, -fm.x);
    EXPECT_EQ(fp.y, -fm.y);
    EXPECT_GT(dot(fp, v), 0.0);
  }
}

TEST(Internal, ScalesAndClamps) {
  EXPECT_EQ(internal_force({0, 0}, 8.5e-7), (Vec2{0, 0}));
  EXPECT_EQ(internal_force({-1, 0}, 8.5e-7), (Vec2{-8.5e-7, 0}));
  EXPECT_EQ(internal_force({1.7, 0}, 8.5e-7), (Vec2{8.5e-7, 0}));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    const Vec2 f = internal_force({d(rng), d(rng)}, 8.5e-7);
    EXPECT_LE(std::abs(f.x), 8.5e-7);
    EXPECT_LE(std::abs(f.y), 8.5e-7);
  }
}

TEST(Contact, Pairs) {
  EXPECT_TRUE(contact_pairs({agent_at(0.05, 1e-3), agent_at(0.051, 1e-3, 1)}).empty());
  const auto p = contact_pairs({agent_at(0.05, 1e-3), agent_at(0.0505, 1e-3, 1)});
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], std::make_pair(0, 1));
  SwarmConfig cfg;
  EXPECT_TRUE(contact_pairs(make_lattice(cfg, 2e-3)).empty());
}

TEST(Contact, CompressiveNormalOnly) {
  const std::vector<AgentState> pair{agent_at(0.05, 1e-3, 0), agent_at(0.0505, 1e-3, 1)};
  const double F = 8.5e-7;
  // Agent 0 sits left of agent 1 and pushes it along +x.
  Vec2 c = contact_force(1, pair, {{1, 0}, {0, 0}}, F);
  EXPECT_NEAR(c.x, F, 1e-22);
  EXPECT_NEAR(c.y, 0.0, 1e-22);
  c = contact_force(1, pair, {{0, 1}, {0, 0}}, F);
  EXPECT_NEAR(c.x, 0.0, 1e-22);
  EXPECT_NEAR(c.y, 0.0, 1e-22);
  c = contact_force(1, pair, {{-1, 0}, {0, 0}}, F);  // pulling away transmits nothing
  EXPECT_EQ(c, (Vec2{0, 0}));
  EXPECT_EQ(contact_force(0, {pair[0]}, {{1, 1}}, F), (Vec2{0, 0}));
  const std::vector<AgentState> apart{agent_at(0.05, 1e-3, 0), agent_at(0.0505 + 0.06 * kR, 1e-3, 1)};
  EXPECT_EQ(contact_force(1, apart, {{1, 0}, {0, 0}}, F), (Vec2{0, 0}));
}

TEST(Overlap, SymmetricSplitAndInelastic) {
  const Walls w{0.1, 2e-3};
  std::vector<AgentState> ag{agent_at(0.05, 1e-3, 0), agent_at(0.05 + 1.9 * kR, 1e-3, 1)};
  ag[0].vel = {0.01, 0.0};
  ag[1].vel = {-0.01, 0.002};
  const auto out = resolve_overlaps(ag, w);
  EXPECT_NEAR(out[0].pos.x, 0.05 - 0.05 * kR, 1e-15);
  EXPECT_NEAR(out[1].pos.x, 0.05 + 1.95 * kR, 1e-15);
  EXPECT_NEAR(out[0].vel.x, 0.0, 1e-15);
  EXPECT_NEAR(out[1].vel.x, 0.0, 1e-15);
  EXPECT_EQ(out[1].vel.y, 0.002);
}

TEST(Overlap, WallProjection) {
  auto a = agent_at(0.05, 0.5 * kR);
  a.vel = {0.0, -0.3};
  const auto out = resolve_overlaps({a}, Walls{0.1, 2e-3});
  EXPECT_EQ(out[0].pos.y, kR);
  EXPECT_GE(out[0].vel.y, 0.0);
}

TEST(Overlap, IdempotentOnSeparatedAgents) {
  const auto lattice = make_lattice(SwarmConfig{}, 2e-3);
  EXPECT_EQ(resolve_overlaps(lattice, Walls{0.1, 2e-3}), lattice);
}

TEST(Overlap, RandomForcesKeepAgentsInside) {
  const Walls w{0.02, 2e-3};
  SwarmConfig cfg;
  cfg.cols = 4;
  cfg.center_x = 0.01;
  auto agents = make_lattice(cfg, w.width);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1e-4, 1e-4);
  for (int step = 0; step < 2000; ++step) {
    for (auto& a : agents) a = integrate_agent(a, {d(rng), d(rng)}, 1e-3);
    agents = resolve_overlaps(std::move(agents), w);
    for (const auto& a : agents) {
      ASSERT_GE(a.pos.x, a.radius);
      ASSERT_LE(a.pos.x, w.length - a.radius);
      ASSERT_GE(a.pos.y, a.radius);
      ASSERT_LE(a.pos.y, w.width - a.radius);
      ASSERT_TRUE(is_finite(a.vel));
    }
  }
}

TEST(Integrate, SemiImplicitEuler) {
  auto a = agent_at(0.0, 0.0);
  a.vel = {0.2, -0.1};
  auto b = integrate_agent(a, {0, 0}, 0.01);
  EXPECT_NEAR(b.pos.x, 0.002, 1e-18);
  EXPECT_NEAR(b.pos.y, -0.001, 1e-18);
  a.vel = {};
  b = integrate_agent(a, {a.mass, 0.0}, 1.0);
  EXPECT_EQ(b.vel, (Vec2{1.0, 0.0}));
  EXPECT_EQ(b.pos, (Vec2{1.0, 0.0}));
  AgentState c = a;
  for (int k = 0; k < 10; ++k) c = integrate_agent(c, {2.0 * a.mass, 0.0}, 0.5);
  EXPECT_NEAR(c.vel.x, 10 * 2.0 * 0.5, 1e-12);
}

TEST(Mask, EmptyWithoutAgents) {
  EXPECT_EQ(build_obstacle_mask({}, channel()).count(), 0);
}

TEST(Mask, DiskMatchesBruteForceCount) {
  const auto g = channel();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(5e-3, 15e-3), uy(kR, 2e-3 - kR);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = agent_at(ux(rng), uy(rng));
    if (trial == 0) a.pos = g.cell_center(100, 10);
    a.vel = {0.003, -0.001};
    const auto m = build_obstacle_mask({a}, g);
    int expected = 0;
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.ny; ++j) {
        const Vec2 c = g.cell_center(i, j);
        const bool in = (c.x - a.pos.x) * (c.x - a.pos.x) + (c.y - a.pos.y) * (c.y - a.pos.y) <= kR * kR;
        expected += in;
        EXPECT_EQ(m.is_solid(i, j), in);
        if (in) {
          EXPECT_EQ(m.solid_u(i, j), 0.003);
          EXPECT_EQ(m.solid_v(i, j), -0.001);
        }
      }
    }
    EXPECT_EQ(m.count(), expected);
    if (trial == 0) EXPECT_EQ(expected, 21);
  }
}

TEST(Mask, AgentAtRestAndBoundaryColumns) {
  const auto g = channel();
  const auto m = build_obstacle_mask({agent_at(kR, 1e-3), agent_at(g.length() - kR, 1e-3, 1)}, g);
  for (int j = 0; j < g.ny; ++j) {
    EXPECT_FALSE(m.is_solid(0, j));
    EXPECT_FALSE(m.is_solid(g.nx - 1, j));
  }
  EXPECT_GT(m.count(), 0);
  for (double v : m.solid_u.flat()) EXPECT_EQ(v, 0.0);
}

TEST(Mask, NearestAgentWins) {
  const auto g = channel();
  auto a = agent_at(10.0e-3, 1e-3, 0);
  auto b = agent_at(10.4e-3, 1e-3, 1);
  a.vel = {1.0, 0.0};
  b.vel = {2.0, 0.0};
  const auto m = build_obstacle_mask({a, b}, g);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (!m.is_solid(i, j)) continue;
      const Vec2 c = g.cell_center(i, j);
      EXPECT_EQ(m.solid_u(i, j), norm(c - a.pos) <= norm(c - b.pos) ? 1.0 : 2.0);
    }
  }
}

TEST(Lattice, GeometryAndValidation) {
  SwarmConfig cfg;
  const auto ag = make_lattice(cfg, 2e-3);
  ASSERT_EQ(ag.size(), 16u);
  EXPECT_NEAR(mean_position(ag).x, 0.05, 1e-15);
  EXPECT_NEAR(mean_position(ag).y, 1e-3, 1e-15);
  EXPECT_NEAR(ag.front().pos.x, 0.0465, 1e-15);
  EXPECT_NEAR(ag.back().pos.x, 0.0535, 1e-15);
  for (const auto& a : ag) EXPECT_TRUE(std::abs(a.pos.y - 0.5e-3) < 1e-15 || std::abs(a.pos.y - 1.5e-3) < 1e-15);
  EXPECT_NO_THROW(cfg.validate(0.1, 2e-3));
  cfg.spacing = 1.2e-3;
  EXPECT_THROW(cfg.validate(0.1, 2e-3), ValidationError);
}

TEST(Trajectory, CsvLayout) {
  std::ostringstream os;
  write_trajectory_header(os);
  write_trajectory_rows(os, 3, 0.015, {agent_at(0.05, 1e-3, 7)}, {{-1, 0}}, {ForceBreakdown{}});
  EXPECT_EQ(os.str(),
            "step,t,agent_id,x,y,vx,vy,ax_action,ay_action,f_hydro_x,f_hydro_y,f_drag_x,f_drag_y\n"
            "3,0.015,7,0.05,0.001,0,0,-1,0,0,0,0,0\n");
}
