#pragma once

#include <algorithm>
#include <cmath>

#include "fluxswarm/flow/grid.hpp"

namespace fluxswarm::flow {

namespace detail {

// Bilinear interpolation of `f` at fractional index (gi, gj), clamped to the
// stored sample range.
inline double bilinear(const Field2D& f, double gi, double gj) {
  const int n0 = f.extent0();
  const int n1 = f.extent1();
  gi = std::clamp(gi, 0.0, static_cast<double>(n0 - 1));
  gj = std::clamp(gj, 0.0, static_cast<double>(n1 - 1));
  const int i0 = std::min(static_cast<int>(gi), n0 - 2 < 0 ? 0 : n0 - 2);
  const int j0 = std::min(static_cast<int>(gj), n1 - 2 < 0 ? 0 : n1 - 2);
  const int i1 = std::min(i0 + 1, n0 - 1);
  const int j1 = std::min(j0 + 1, n1 - 1);
  const double fi = gi - i0;
  const double fj = gj - j0;
  const double a = f(i0, j0) + fj * (f(i0, j1) - f(i0, j0));
  const double b = f(i1, j0) + fj * (f(i1, j1) - f(i1, j0));
  return a + fi * (b - a);
}

}  // namespace detail

/// Bilinear sample of the cell-centred pressure at `pos` (m).
inline double sample_pressure(const PressureField& p, const GridSpec& g, Vec2 pos) {
  return detail::bilinear(p.p, pos.x / g.dx - 0.5, pos.y / g.dy - 0.5);
}

inline double sample_cell_field(const Field2D& f, const GridSpec& g, Vec2 pos) {
  return detail::bilinear(f, pos.x / g.dx - 0.5, pos.y / g.dy - 0.5);
}

inline double sample_u(const StaggeredVelocityField& vel, const GridSpec& g, Vec2 pos) {
  return detail::bilinear(vel.u, pos.x / g.dx, pos.y / g.dy - 0.5);
}

inline double sample_v(const StaggeredVelocityField& vel, const GridSpec& g, Vec2 pos) {
  return detail::bilinear(vel.v, pos.x / g.dx - 0.5, pos.y / g.dy);
}

/// Velocity at an arbitrary point, each component interpolated from its own faces.
inline Vec2 sample_velocity(const StaggeredVelocityField& vel, const GridSpec& g, Vec2 pos) {
  return {sample_u(vel, g, pos), sample_v(vel, g, pos)};
}

inline Vec2 clamp_to_domain(const GridSpec& g, Vec2 pos) {
  return {std::clamp(pos.x, 0.0, g.length()), std::clamp(pos.y, 0.0, g.width())};
}

}  // namespace fluxswarm::flow
