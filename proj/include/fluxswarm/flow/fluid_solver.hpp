#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "fluxswarm/core/errors.hpp"
#include "fluxswarm/flow/grid.hpp"
#include "fluxswarm/flow/pressure_solver.hpp"
#include "fluxswarm/flow/sampling.hpp"
#include "fluxswarm/flow/waveform.hpp"

namespace fluxswarm::flow {

/// Tangential-velocity treatment at the channel walls used by diffusion.
enum class WallTreatment { kNoSlip, kFreeSlip };

inline double diffusion_number(double nu, double dt, double dx) { return nu * dt / (dx * dx); }

/// Cell divergence (1/s) of a MAC velocity field.
inline Field2D divergence(const StaggeredVelocityField& vel, const GridSpec& g) {
  Field2D div(g.nx, g.ny);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      div(i, j) = (vel.u(i + 1, j) - vel.u(i, j)) / g.dx + (vel.v(i, j + 1) - vel.v(i, j)) / g.dy;
    }
  }
  return div;
}

/// Largest |div u| over cells that are not solid.
inline double max_fluid_divergence(const StaggeredVelocityField& vel, const GridSpec& g,
                                   const ObstacleMask* mask = nullptr) {
  const Field2D div = divergence(vel, g);
  double m = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (mask && mask->is_solid(i, j)) continue;
      m = std::max(m, std::abs(div(i, j)));
    }
  }
  return m;
}

/// Explicit viscous update u += ν dt ∇²u on interior faces.
///
/// Inflow faces and wall-normal faces are held fixed; the outlet face is left
/// for the boundary step. Throws StabilityViolation above diffusion number 0.25.
inline StaggeredVelocityField diffuse(const StaggeredVelocityField& vel, const GridSpec& g, double nu,
                                      double dt, WallTreatment wall = WallTreatment::kNoSlip) {
  const double d = diffusion_number(nu, dt, g.dx);
  if (d > 0.25) {
    throw StabilityViolation("diffusion number " + std::to_string(d) + " exceeds 0.25");
  }
  const double ghost_sign = wall == WallTreatment::kNoSlip ? -1.0 : 1.0;
  StaggeredVelocityField out = vel;
  const auto& u = vel.u;
  const auto& v = vel.v;
  for (int i = 1; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double c = u(i, j);
      const double s = j > 0 ? u(i, j - 1) : ghost_sign * c;
      const double n = j + 1 < g.ny ? u(i, j + 1) : ghost_sign * c;
      out.u(i, j) = c + d * (u(i - 1, j) + u(i + 1, j) + s + n - 4.0 * c);
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 1; j < g.ny; ++j) {
      const double c = v(i, j);
      const double w = i > 0 ? v(i - 1, j) : ghost_sign * c;  // inflow carries no v
      const double e = i + 1 < g.nx ? v(i + 1, j) : c;       // outlet: zero gradient
      out.v(i, j) = c + d * (w + e + v(i, j - 1) + v(i, j + 1) - 4.0 * c);
    }
  }
  return out;
}

/// Semi-Lagrangian transport of a MAC velocity field by itself: one explicit
/// Euler backtrace per face, bilinear lookup, backtrace clamped to the domain.
///
/// Backtraces are carried out in index space of the sampled array so that a
/// zero displacement lands exactly on the stored sample.
inline StaggeredVelocityField advect_velocity(const StaggeredVelocityField& vel, const GridSpec& g, double dt) {
  using detail::bilinear;
  StaggeredVelocityField out = vel;
  const double cx = dt / g.dx;
  const double cy = dt / g.dy;
  for (int i = 1; i <= g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double ux = vel.u(i, j);
      const double vy = bilinear(vel.v, i - 0.5, j + 0.5);
      out.u(i, j) = bilinear(vel.u, i - ux * cx, j - vy * cy);
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 1; j < g.ny; ++j) {
      const double ux = bilinear(vel.u, i + 0.5, j - 0.5);
      const double vy = vel.v(i, j);
      out.v(i, j) = bilinear(vel.v, i - ux * cx, j - vy * cy);
    }
  }
  return out;
}

/// Semi-Lagrangian transport of a cell-centred scalar.
inline Field2D advect_scalar(const Field2D& field, const StaggeredVelocityField& vel, const GridSpec& g, double dt) {
  Field2D out(g.nx, g.ny);
  const double cx = dt / g.dx;
  const double cy = dt / g.dy;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double ux = 0.5 * (vel.u(i, j) + vel.u(i + 1, j));
      const double vy = 0.5 * (vel.v(i, j) + vel.v(i, j + 1));
      out(i, j) = detail::bilinear(field, i - ux * cx, j - vy * cy);
    }
  }
  return out;
}

/// Imposes the rigid obstacle velocity on every face touching a solid cell.
/// Faces shared by two solid cells take the mean of both. Wall faces stay 0.
inline void apply_direct_forcing(StaggeredVelocityField& vel, const GridSpec& g, const ObstacleMask& mask) {
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (!mask.is_solid(i, j)) continue;
      const double su = mask.solid_u(i, j);
      const double sv = mask.solid_v(i, j);
      auto blend_u = [&](int fi, int other_i) {
        const bool other_solid = other_i >= 0 && other_i < g.nx && mask.is_solid(other_i, j);
        vel.u(fi, j) = other_solid ? 0.5 * (su + mask.solid_u(other_i, j)) : su;
      };
      blend_u(i, i - 1);
      blend_u(i + 1, i + 1);
      auto blend_v = [&](int fj, int other_j) {
        if (fj == 0 || fj == g.ny) return;
        const bool other_solid = other_j >= 0 && other_j < g.ny && mask.is_solid(i, other_j);
        vel.v(i, fj) = other_solid ? 0.5 * (sv + mask.solid_v(i, other_j)) : sv;
      };
      blend_v(j, j - 1);
      blend_v(j + 1, j + 1);
    }
  }
}

/// Inflow column set to the parabolic profile with centreline `inflow_peak`,
/// zero-gradient outlet, impermeable walls, then direct forcing (if a mask is given).
inline void apply_boundary_conditions(StaggeredVelocityField& vel, const GridSpec& g, double inflow_peak,
                                      const ObstacleMask* mask = nullptr) {
  const double width = g.width();
  for (int j = 0; j < g.ny; ++j) {
    vel.u(0, j) = parabolic_profile((j + 0.5) * g.dy, inflow_peak, width);
    vel.u(g.nx, j) = vel.u(g.nx - 1, j);
  }
  for (int i = 0; i < g.nx; ++i) {
    vel.v(i, 0) = 0.0;
    vel.v(i, g.ny) = 0.0;
  }
  if (mask) apply_direct_forcing(vel, g, *mask);
}

inline void apply_boundary_conditions(StaggeredVelocityField& vel, const GridSpec& g, const InflowWaveform& wave,
                                      double t, const ObstacleMask* mask = nullptr) {
  apply_boundary_conditions(vel, g, wave.velocity(t), mask);
}

struct ProjectionReport {
  PoissonResult poisson;
  int active_cells = 0;
  bool inflow_blocked = false;  // some inflow cell has no fluid path to the outlet
};

namespace detail {

// Fluid cells with a 4-connected fluid path to the outlet column.
inline std::vector<unsigned char> reachable_fluid(const GridSpec& g, const ObstacleMask& mask) {
  const int ny = g.ny;
  std::vector<unsigned char> seen(static_cast<std::size_t>(g.nx) * ny, 0);
  std::deque<int> queue;
  for (int j = 0; j < ny; ++j) {
    if (!mask.is_solid(g.nx - 1, j)) {
      const int k = (g.nx - 1) * ny + j;
      seen[k] = 1;
      queue.push_back(k);
    }
  }
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop_front();
    const int i = k / ny;
    const int j = k % ny;
    const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& c : nb) {
      if (c[0] < 0 || c[0] >= g.nx || c[1] < 0 || c[1] >= ny) continue;
      const int kk = c[0] * ny + c[1];
      if (seen[kk] || mask.is_solid(c[0], c[1])) continue;
      seen[kk] = 1;
      queue.push_back(kk);
    }
  }
  return seen;
}

// Extends pressure into inactive cells by repeated averaging of filled
// neighbours so interpolation next to obstacles sees the surrounding fluid.
inline void extrapolate_pressure(Field2D& p, const GridSpec& g, std::vector<unsigned char> filled) {
  const int ny = g.ny;
  for (int pass = 0; pass < 8; ++pass) {
    std::vector<std::pair<int, double>> updates;
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        if (filled[i * ny + j]) continue;
        double sum = 0.0;
        int n = 0;
        const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (const auto& c : nb) {
          if (c[0] < 0 || c[0] >= g.nx || c[1] < 0 || c[1] >= ny) continue;
          if (!filled[c[0] * ny + c[1]]) continue;
          sum += p(c[0], c[1]);
          ++n;
        }
        if (n > 0) updates.emplace_back(i * ny + j, sum / n);
      }
    }
    if (updates.empty()) break;
    for (const auto& [k, val] : updates) {
      p(k / ny, k % ny) = val;
      filled[k] = 1;
    }
  }
}

}  // namespace detail

/// Pressure projection: solves A p = -(ρ dx²/dt) div u on fluid cells connected
/// to the outlet (Neumann at walls, inflow and solid faces; p = 0 just past the
/// outlet face) and subtracts (dt/ρ)∇p from every open face.
inline ProjectionReport project(StaggeredVelocityField& vel, PressureField& pressure, const ObstacleMask& mask,
                                const GridSpec& g, double rho, double dt, PressureSolver& solver,
                                double divergence_tol = 1e-9) {
  const int nx = g.nx;
  const int ny = g.ny;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  ProjectionReport report;

  PoissonStencil a;
  a.nx = nx;
  a.ny = ny;
  a.active = detail::reachable_fluid(g, mask);
  a.diag.assign(n, 1.0);
  a.east.assign(n, 0);
  a.north.assign(n, 0);
  auto act = [&](int i, int j) { return a.active[static_cast<std::size_t>(i) * ny + j] != 0; };
  for (int j = 0; j < ny; ++j) {
    if (!mask.is_solid(0, j) && !act(0, j)) report.inflow_blocked = true;
  }

  std::vector<double> rhs(n, 0.0);
  const double scale = rho * g.dx * g.dx / dt;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * ny + j;
      if (!a.active[k]) continue;
      ++report.active_cells;
      int open = 0;
      if (i > 0 && act(i - 1, j)) ++open;
      if (i + 1 == nx) {
        ++open;
      } else if (act(i + 1, j)) {
        ++open;
        a.east[k] = 1;
      }
      if (j > 0 && act(i, j - 1)) ++open;
      if (j + 1 < ny && act(i, j + 1)) {
        ++open;
        a.north[k] = 1;
      }
      a.diag[k] = open;
      const double div =
          (vel.u(i + 1, j) - vel.u(i, j)) / g.dx + (vel.v(i, j + 1) - vel.v(i, j)) / g.dy;
      rhs[k] = -div * scale;
    }
  }

  pressure.p = Field2D(nx, ny);
  report.poisson = solver.solve(a, rhs, pressure.p.flat(), divergence_tol * scale);

  const double s = dt / (rho * g.dx);
  auto& p = pressure.p;
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      if (act(i - 1, j) && act(i, j)) vel.u(i, j) -= s * (p(i, j) - p(i - 1, j));
    }
    if (act(nx - 1, j)) vel.u(nx, j) -= s * (0.0 - p(nx - 1, j));
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) {
      if (act(i, j - 1) && act(i, j)) vel.v(i, j) -= s * (p(i, j) - p(i, j - 1));
    }
  }

  // Fluid pockets sealed off by obstacles carry no pressure information; they
  // are set at rest.
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (act(i, j) || mask.is_solid(i, j)) continue;
      if (i > 0 && !mask.is_solid(i - 1, j)) vel.u(i, j) = 0.0;
      if (i + 1 < nx && !mask.is_solid(i + 1, j)) vel.u(i + 1, j) = 0.0;
      if (j > 0 && !mask.is_solid(i, j - 1)) vel.v(i, j) = 0.0;
      if (j + 1 < ny && !mask.is_solid(i, j + 1)) vel.v(i, j + 1) = 0.0;
    }
  }
  detail::extrapolate_pressure(p, g, a.active);
  return report;
}

struct FluidSettings {
  PoissonSettings poisson;
  double divergence_tol = 1e-9;  // 1/s, target of the Poisson iteration
  double blowup_speed = 10.0;    // m/s
  double courant_limit = 1.1;
  WallTreatment wall = WallTreatment::kNoSlip;
};

struct FluidStepReport {
  bool blowup = false;
  bool courant_exceeded = false;
  double max_speed = 0.0;
  double courant = 0.0;
  int poisson_iterations = 0;
};

/// Owns the grid, fluid constants, inflow waveform and the pressure solver
/// cache for one channel. Not thread-safe; one instance per environment.
class FluidSolver {
 public:
  FluidSolver(GridSpec grid, FluidProps fluid, InflowWaveform wave, double dt_sub, FluidSettings settings = {})
      : grid_(grid), fluid_(fluid), wave_(std::move(wave)), dt_sub_(dt_sub), settings_(settings),
        pressure_solver_(settings.poisson) {
    if (!(fluid_.rho > 0.0) || !(fluid_.mu > 0.0)) throw ValidationError("fluid: rho and mu must be positive");
    const double d = diffusion_number(fluid_.nu(), dt_sub_, grid_.dx);
    if (d > 0.25) {
      throw StabilityViolation("diffusion number " + std::to_string(d) + " exceeds 0.25");
    }
  }

  const GridSpec& grid() const { return grid_; }
  const FluidProps& fluid() const { return fluid_; }
  const InflowWaveform& waveform() const { return wave_; }
  double dt_sub() const { return dt_sub_; }
  const FluidSettings& settings() const { return settings_; }

  /// Developed parabolic flow at the inflow value for time t; zero pressure.
  FluidState initial_state(double t) const {
    FluidState s(grid_);
    const double peak = wave_.velocity(t);
    for (int i = 0; i <= grid_.nx; ++i) {
      for (int j = 0; j < grid_.ny; ++j) {
        s.vel.u(i, j) = parabolic_profile((j + 0.5) * grid_.dy, peak, grid_.width());
      }
    }
    return s;
  }

  ProjectionReport project(FluidState& state, const ObstacleMask& mask, double dt) {
    return flow::project(state.vel, state.pressure, mask, grid_, fluid_.rho, dt, pressure_solver_,
                         settings_.divergence_tol);
  }

  /// Advances the fluid from t to t + dt: boundary conditions → diffusion →
  /// advection → direct forcing → projection. Inflow is evaluated at t + dt.
  FluidStepReport step(FluidState& state, const ObstacleMask& mask, double dt, double t) {
    FluidStepReport report;
    const double peak = wave_.velocity(t + dt);
    apply_boundary_conditions(state.vel, grid_, peak, &mask);
    state.vel = diffuse(state.vel, grid_, fluid_.nu(), dt, settings_.wall);
    state.vel = advect_velocity(state.vel, grid_, dt);
    apply_direct_forcing(state.vel, grid_, mask);
    const ProjectionReport pr = project(state, mask, dt);
    report.poisson_iterations = pr.poisson.iterations;

    report.max_speed = max_speed(state.vel);
    report.courant = report.max_speed * dt / grid_.dx;
    report.courant_exceeded = report.courant > settings_.courant_limit;
    report.blowup = pr.inflow_blocked || !(report.max_speed <= settings_.blowup_speed) ||
                    !all_finite(state.vel.u) || !all_finite(state.vel.v) || !all_finite(state.pressure.p);
    return report;
  }

 private:
  GridSpec grid_;
  FluidProps fluid_;
  InflowWaveform wave_;
  double dt_sub_;
  FluidSettings settings_;
  PressureSolver pressure_solver_;
};

}  // namespace fluxswarm::flow
