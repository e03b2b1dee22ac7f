#pragma once

#include <cstddef>

#include "paratime/grid.hpp"

namespace paratime {

/// One propagator: second-order central differences in space, velocity
/// Verlet in time, advancing a coupling interval of steps_per_coupling
/// equal steps. Construction enforces the CFL bound dt*max(c)/min(h) <= 1/sqrt(d).
struct PropagatorConfig {
  Grid grid;
  SpeedField speed;
  double dt;
  std::size_t steps_per_coupling;

  PropagatorConfig(Grid g, SpeedField s, double dt_in, std::size_t steps);
};

/// Periodic 2nd-order Laplacian: sum over axes of (f[j+1]-2f[j]+f[j-1])/h^2.
std::vector<double> laplacian(const std::vector<double>& field, const Grid& grid);

/// One velocity-Verlet step of u_tt = c^2 Lap u:
///   a0 = c^2 Lap u;  u+ = u + dt*udot + dt^2/2 a0;
///   a1 = c^2 Lap u+; udot+ = udot + dt/2 (a0+a1).
WaveState step(const WaveState& state, const PropagatorConfig& cfg);

/// steps_per_coupling Verlet steps; bitwise reproducible for fixed input.
/// Throws PropagationDiverged if the result is not finite.
WaveState propagate_coupling(const WaveState& state, const PropagatorConfig& cfg);

}  // namespace paratime
