#pragma once

#include <string>
#include <vector>

#include "paratime/grid.hpp"

namespace paratime {

/// Discrete gradient used for the energy components: antisymmetric central
/// differences of order 2/4/6/8 with periodic wrap, or FFT differentiation.
enum class GradientScheme { fd2, fd4, fd6, fd8, spectral };

GradientScheme gradient_scheme_from_string(const std::string& name);
std::string to_string(GradientScheme scheme);

/// Half-stencil coefficients beta_1..beta_m of the central difference
/// (1/h) sum_j beta_j (f[i+j] - f[i-j]). Rejects spectral.
const std::vector<double>& stencil_coefficients(GradientScheme scheme);

/// Energy components of a wave state: per-axis discrete gradients of u,
/// the weighted momentum c^{-1} udot, and the field sum of u (carried for
/// reconstruction of the zero mode).
struct EnergyComponents {
  Grid grid;
  std::vector<std::vector<double>> grad;  // d blocks, axis order 0..d-1
  std::vector<double> momentum;
  double mean_u;  // sum_j u(x_j)
};

/// Discrete derivative of a field along one axis.
std::vector<double> gradient_axis(const std::vector<double>& field, const Grid& grid,
                                  int axis, GradientScheme scheme);

/// [u, udot] -> [grad_h u, c^{-1} udot], plus the sum of u.
EnergyComponents to_energy_components(const WaveState& state, const SpeedField& speed,
                                      GradientScheme scheme);

/// Inverse map: udot = c*momentum; u recovered from the gradient blocks in
/// Fourier space, u_hat = -i (xi . g_hat)/|xi|^2 for xi != 0 and the zero
/// mode fixed so that sum(u) = mean_u. Output is real.
WaveState from_energy_components(const EnergyComponents& comp, const SpeedField& speed);

/// Discrete wave energy  E = 1/2 sum |grad_h u|^2 vol + 1/2 sum c^{-2} |udot|^2 vol.
double energy(const WaveState& state, const SpeedField& speed, GradientScheme scheme);
/// Same energy evaluated from precomputed components.
double energy(const EnergyComponents& comp);

/// sqrt(E(a-b)/E(b)); throws std::domain_error when E(b)=0.
double energy_error(const WaveState& a, const WaveState& b, const SpeedField& speed,
                    GradientScheme scheme);
/// ||u_a - u_b||_2 / ||u_b||_2 on the displacement component.
double l2_error(const WaveState& a, const WaveState& b);

}  // namespace paratime
