#pragma once

#include <cmath>
#include <string>

#include "fluxswarm/core/array2d.hpp"
#include "fluxswarm/core/errors.hpp"
#include "fluxswarm/core/vec2.hpp"

namespace fluxswarm::flow {

/// Uniform Cartesian channel grid: x along the channel, y across it.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  double length() const { return nx * dx; }
  double width() const { return ny * dy; }

  /// Builds a square-cell grid covering length × width. Throws
  /// ValidationError if the extents are not integer multiples of dx or the
  /// grid would have fewer than 4 cells along an axis.
  static GridSpec make(double length, double width, double cell) {
    if (!(cell > 0.0) || !(length > 0.0) || !(width > 0.0)) {
      throw ValidationError("grid: length, width and dx must be positive");
    }
    const double fx = length / cell;
    const double fy = width / cell;
    const int nx = static_cast<int>(std::lround(fx));
    const int ny = static_cast<int>(std::lround(fy));
    if (std::abs(fx - nx) > 1e-6 * fx || std::abs(fy - ny) > 1e-6 * fy) {
      throw ValidationError("grid: domain extents must be integer multiples of dx");
    }
    if (nx < 4 || ny < 4) throw ValidationError("grid: need at least 4 cells per axis");
    return GridSpec{nx, ny, cell, cell};
  }

  Vec2 cell_center(int i, int j) const { return {(i + 0.5) * dx, (j + 0.5) * dy}; }
};

struct FluidProps {
  double rho = 1060.0;  // kg/m^3
  double mu = 3.0e-3;   // Pa s

  double nu() const { return mu / rho; }
};

/// MAC velocity: u on x-faces ((nx+1) × ny), v on y-faces (nx × (ny+1)).
struct StaggeredVelocityField {
  Field2D u;
  Field2D v;

  StaggeredVelocityField() = default;
  explicit StaggeredVelocityField(const GridSpec& g) : u(g.nx + 1, g.ny), v(g.nx, g.ny + 1) {}

  friend bool operator==(const StaggeredVelocityField&, const StaggeredVelocityField&) = default;
};

/// Cell-centred gauge pressure (nx × ny). The reference p = 0 sits in the
/// ghost column just past the outlet face.
struct PressureField {
  Field2D p;

  PressureField() = default;
  explicit PressureField(const GridSpec& g) : p(g.nx, g.ny) {}

  friend bool operator==(const PressureField&, const PressureField&) = default;
};

struct FluidState {
  StaggeredVelocityField vel;
  PressureField pressure;

  FluidState() = default;
  explicit FluidState(const GridSpec& g) : vel(g), pressure(g) {}
};

/// Solid cells covered by moving agents, and the rigid velocity imposed there.
struct ObstacleMask {
  Array2D<unsigned char> solid;
  Field2D solid_u;
  Field2D solid_v;

  ObstacleMask() = default;
  explicit ObstacleMask(const GridSpec& g) : solid(g.nx, g.ny, 0), solid_u(g.nx, g.ny), solid_v(g.nx, g.ny) {}

  bool is_solid(int i, int j) const { return solid(i, j) != 0; }

  int count() const {
    int n = 0;
    for (unsigned char c : solid.flat()) n += c != 0;
    return n;
  }
};

inline double max_speed(const StaggeredVelocityField& vel) {
  return std::max(max_abs(vel.u), max_abs(vel.v));
}

}  // namespace fluxswarm::flow
