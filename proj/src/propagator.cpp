#include "paratime/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "paratime/errors.hpp"

namespace paratime {

PropagatorConfig::PropagatorConfig(Grid g, SpeedField s, double dt_in, std::size_t steps)
    : grid(std::move(g)), speed(std::move(s)), dt(dt_in), steps_per_coupling(steps) {
  if (speed.grid != grid)
    throw std::invalid_argument("PropagatorConfig: speed field lives on a different grid");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("PropagatorConfig: dt must be positive");
  if (steps_per_coupling == 0)
    throw std::invalid_argument("PropagatorConfig: steps_per_coupling must be positive");
  const double cmax = *std::max_element(speed.c.begin(), speed.c.end());
  double hmin = grid.spacing(0);
  for (int a = 1; a < grid.dim(); ++a) hmin = std::min(hmin, grid.spacing(a));
  const double cfl = dt * cmax / hmin;
  const double bound = 1.0 / std::sqrt(static_cast<double>(grid.dim()));
  if (cfl > bound * (1.0 + 1e-12))
    throw std::invalid_argument("PropagatorConfig: CFL violated, dt*max(c)/min(h) = " +
                                std::to_string(cfl) + " > " + std::to_string(bound));
}

namespace {

void laplacian_into(const std::vector<double>& f, const Grid& g, std::vector<double>& out) {
  if (g.dim() == 1) {
    const std::size_t n = g.points(0);
    const double ih2 = 1.0 / (g.spacing(0) * g.spacing(0));
    out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) * ih2;
    for (std::size_t j = 1; j + 1 < n; ++j)
      out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) * ih2;
    out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) * ih2;
    return;
  }
  const std::size_t ny = g.points(0), nx = g.points(1);
  const double ihy2 = 1.0 / (g.spacing(0) * g.spacing(0));
  const double ihx2 = 1.0 / (g.spacing(1) * g.spacing(1));
  for (std::size_t jy = 0; jy < ny; ++jy) {
    const std::size_t up = (jy + 1) % ny, dn = (jy + ny - 1) % ny;
    const double* row = f.data() + jy * nx;
    const double* rup = f.data() + up * nx;
    const double* rdn = f.data() + dn * nx;
    double* o = out.data() + jy * nx;
    o[0] = (row[1] - 2.0 * row[0] + row[nx - 1]) * ihx2 +
           (rup[0] - 2.0 * row[0] + rdn[0]) * ihy2;
    for (std::size_t jx = 1; jx + 1 < nx; ++jx)
      o[jx] = (row[jx + 1] - 2.0 * row[jx] + row[jx - 1]) * ihx2 +
              (rup[jx] - 2.0 * row[jx] + rdn[jx]) * ihy2;
    o[nx - 1] = (row[0] - 2.0 * row[nx - 1] + row[nx - 2]) * ihx2 +
                (rup[nx - 1] - 2.0 * row[nx - 1] + rdn[nx - 1]) * ihy2;
  }
}

void verlet_step_inplace(std::vector<double>& u, std::vector<double>& udot,
                         const PropagatorConfig& cfg, std::vector<double>& a0,
                         std::vector<double>& a1) {
  const std::vector<double>& c = cfg.speed.c;
  const double dt = cfg.dt, half_dt2 = 0.5 * dt * dt, half_dt = 0.5 * dt;
  laplacian_into(u, cfg.grid, a0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    a0[i] *= c[i] * c[i];
    u[i] += dt * udot[i] + half_dt2 * a0[i];
  }
  laplacian_into(u, cfg.grid, a1);
  for (std::size_t i = 0; i < u.size(); ++i)
    udot[i] += half_dt * (a0[i] + c[i] * c[i] * a1[i]);
}

}  // namespace

std::vector<double> laplacian(const std::vector<double>& field, const Grid& grid) {
  if (field.size() != grid.size())
    throw std::invalid_argument("laplacian: field size does not match grid");
  std::vector<double> out(field.size());
  laplacian_into(field, grid, out);
  return out;
}

WaveState step(const WaveState& state, const PropagatorConfig& cfg) {
  if (state.grid != cfg.grid)
    throw std::invalid_argument("step: state does not live on the propagator grid");
  WaveState out = state;
  std::vector<double> a0(out.u.size()), a1(out.u.size());
  verlet_step_inplace(out.u, out.udot, cfg, a0, a1);
  if (!out.finite()) throw PropagationDiverged("step: non-finite state produced");
  return out;
}

WaveState propagate_coupling(const WaveState& state, const PropagatorConfig& cfg) {
  if (state.grid != cfg.grid)
    throw std::invalid_argument("propagate_coupling: state does not live on the propagator grid");
  WaveState out = state;
  std::vector<double> a0(out.u.size()), a1(out.u.size());
  for (std::size_t s = 0; s < cfg.steps_per_coupling; ++s)
    verlet_step_inplace(out.u, out.udot, cfg, a0, a1);
  if (!out.finite())
    throw PropagationDiverged("propagate_coupling: non-finite state produced");
  return out;
}

}  // namespace paratime
