#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "fluxswarm/core/errors.hpp"
#include "fluxswarm/flow/fluid_solver.hpp"
#include "fluxswarm/flow/grid.hpp"
#include "fluxswarm/flow/waveform.hpp"
#include "fluxswarm/swarm/agent.hpp"

namespace fluxswarm::env {

/// Everything needed to build one channel environment.
struct EnvConfig {
  // Channel and fluid.
  double length = 0.1;    // m
  double width = 2.0e-3;  // m
  double dx = 1.0e-4;     // m
  flow::FluidProps fluid;
  flow::InflowWaveform waveform = flow::InflowWaveform::triphasic();
  flow::FluidSettings solver;

  swarm::SwarmConfig swarm;

  // Episode.
  double dt = 5.0e-3;  // s per environment step
  int substeps = 20;
  double t_max = 10.0;  // s
  double x_success = 0.020;
  double x_failure = 0.080;
  double metric_margin = 0.020;  // excluded from reported metrics at each end
  double u_ref = 0.4;            // m/s, observation scale
  std::uint64_t seed = 0;

  double dt_sub() const { return dt / substeps; }
  flow::GridSpec grid() const { return flow::GridSpec::make(length, width, dx); }
  int max_steps() const { return static_cast<int>(std::lround(t_max / dt)); }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const {
    const auto g = grid();
    if (substeps < 1) throw ValidationError("env: substeps must be >= 1");
    if (!(dt > 0.0)) throw ValidationError("env: dt must be positive");
    if (!(t_max > 0.0)) throw ValidationError("env: t_max must be positive");
    if (!(x_success < x_failure)) throw ValidationError("env: x_success must be < x_failure");
    if (!(u_ref > 0.0)) throw ValidationError("env: u_ref must be positive");
    if (!(fluid.rho > 0.0) || !(fluid.mu > 0.0)) throw ValidationError("fluid: rho and mu must be positive");
    const double d = flow::diffusion_number(fluid.nu(), dt_sub(), dx);
    if (d > 0.25) {
      throw ValidationError("flow: diffusion number nu*dt_sub/dx^2 = " + std::to_string(d) + " exceeds 0.25");
    }
    double peak = 0.0;
    for (const auto& ph : waveform.phases()) peak = std::max(peak, std::abs(ph.velocity));
    const double courant = peak * dt_sub() / dx;
    if (courant > solver.courant_limit) {
      throw ValidationError("flow: inflow Courant number " + std::to_string(courant) + " exceeds " +
                            std::to_string(solver.courant_limit));
    }
    swarm.validate(g.length(), g.width());
  }
};

}  // namespace fluxswarm::env
