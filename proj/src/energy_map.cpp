#include "paratime/energy_map.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "paratime/fft.hpp"

namespace paratime {

GradientScheme gradient_scheme_from_string(const std::string& name) {
  if (name == "fd2") return GradientScheme::fd2;
  if (name == "fd4") return GradientScheme::fd4;
  if (name == "fd6") return GradientScheme::fd6;
  if (name == "fd8") return GradientScheme::fd8;
  if (name == "spectral") return GradientScheme::spectral;
  throw std::invalid_argument("unknown gradient scheme: " + name);
}

std::string to_string(GradientScheme scheme) {
  switch (scheme) {
    case GradientScheme::fd2: return "fd2";
    case GradientScheme::fd4: return "fd4";
    case GradientScheme::fd6: return "fd6";
    case GradientScheme::fd8: return "fd8";
    case GradientScheme::spectral: return "spectral";
  }
  return "?";
}

const std::vector<double>& stencil_coefficients(GradientScheme scheme) {
  static const std::vector<double> fd2{1.0 / 2.0};
  static const std::vector<double> fd4{2.0 / 3.0, -1.0 / 12.0};
  static const std::vector<double> fd6{3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  static const std::vector<double> fd8{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  switch (scheme) {
    case GradientScheme::fd2: return fd2;
    case GradientScheme::fd4: return fd4;
    case GradientScheme::fd6: return fd6;
    case GradientScheme::fd8: return fd8;
    case GradientScheme::spectral: break;
  }
  throw std::invalid_argument("stencil_coefficients: spectral scheme has no stencil");
}

namespace {

using cplx = std::complex<double>;

std::vector<double> fd_gradient_axis(const std::vector<double>& f, const Grid& g,
                                     int axis, const std::vector<double>& beta) {
  const std::size_t m = beta.size();
  std::vector<double> out(f.size());
  if (g.dim() == 1) {
    const std::size_t n = g.points(0);
    const double ih = 1.0 / g.spacing(0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 1; j <= m; ++j)
        acc += beta[j - 1] * (f[(i + j) % n] - f[(i + n - j) % n]);
      out[i] = acc * ih;
    }
    return out;
  }
  const std::size_t ny = g.points(0), nx = g.points(1);
  if (axis == 0) {
    const double ih = 1.0 / g.spacing(0);
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= m; ++j)
          acc += beta[j - 1] *
                 (f[((iy + j) % ny) * nx + ix] - f[((iy + ny - j) % ny) * nx + ix]);
        out[iy * nx + ix] = acc * ih;
      }
  } else {
    const double ih = 1.0 / g.spacing(1);
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double* row = f.data() + iy * nx;
      double* orow = out.data() + iy * nx;
      for (std::size_t ix = 0; ix < nx; ++ix) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= m; ++j)
          acc += beta[j - 1] * (row[(ix + j) % nx] - row[(ix + nx - j) % nx]);
        orow[ix] = acc * ih;
      }
    }
  }
  return out;
}

// FFT derivative along one axis. The unmatched Nyquist bin is zeroed: its
// sine interpolant vanishes at the nodes, so no real nodal derivative can
// carry it.
std::vector<double> spectral_gradient_axis(const std::vector<double>& f, const Grid& g,
                                           int axis) {
  std::vector<cplx> spec = detail::forward_dft(f, g);
  if (g.dim() == 1) {
    const std::size_t n = g.points(0);
    for (std::size_t k = 0; k < n; ++k) {
      if (detail::is_nyquist(k, n)) {
        spec[k] = 0.0;
      } else {
        spec[k] *= cplx(0.0, detail::wavenumber(g, 0, k));
      }
    }
  } else {
    const std::size_t ny = g.points(0), nx = g.points(1);
    for (std::size_t ky = 0; ky < ny; ++ky)
      for (std::size_t kx = 0; kx < nx; ++kx) {
        const std::size_t k = axis == 0 ? ky : kx;
        const std::size_t n = axis == 0 ? ny : nx;
        cplx& v = spec[ky * nx + kx];
        if (detail::is_nyquist(k, n)) {
          v = 0.0;
        } else {
          v *= cplx(0.0, detail::wavenumber(g, axis, k));
        }
      }
  }
  return detail::inverse_dft_real(std::move(spec), g);
}

}  // namespace

std::vector<double> gradient_axis(const std::vector<double>& field, const Grid& grid,
                                  int axis, GradientScheme scheme) {
  if (field.size() != grid.size())
    throw std::invalid_argument("gradient_axis: field size does not match grid");
  if (axis < 0 || axis >= grid.dim())
    throw std::invalid_argument("gradient_axis: axis out of range");
  if (scheme == GradientScheme::spectral)
    return spectral_gradient_axis(field, grid, axis);
  return fd_gradient_axis(field, grid, axis, stencil_coefficients(scheme));
}

EnergyComponents to_energy_components(const WaveState& state, const SpeedField& speed,
                                      GradientScheme scheme) {
  if (state.grid != speed.grid)
    throw std::invalid_argument("to_energy_components: state/speed grid mismatch");
  EnergyComponents comp{state.grid, {}, std::vector<double>(state.grid.size()), 0.0};
  for (int a = 0; a < state.grid.dim(); ++a)
    comp.grad.push_back(gradient_axis(state.u, state.grid, a, scheme));
  for (std::size_t i = 0; i < comp.momentum.size(); ++i)
    comp.momentum[i] = state.udot[i] / speed.c[i];
  double sum = 0.0;
  for (double v : state.u) sum += v;
  comp.mean_u = sum;
  return comp;
}

WaveState from_energy_components(const EnergyComponents& comp, const SpeedField& speed) {
  const Grid& g = comp.grid;
  if (g != speed.grid)
    throw std::invalid_argument("from_energy_components: grid mismatch");
  if (static_cast<int>(comp.grad.size()) != g.dim())
    throw std::invalid_argument("from_energy_components: wrong number of gradient blocks");

  std::vector<cplx> num(g.size(), cplx(0.0, 0.0));
  for (int a = 0; a < g.dim(); ++a) {
    std::vector<cplx> ghat = detail::forward_dft(comp.grad[static_cast<std::size_t>(a)], g);
    if (g.dim() == 1) {
      for (std::size_t k = 0; k < g.points(0); ++k)
        num[k] += detail::wavenumber(g, 0, k) * ghat[k];
    } else {
      const std::size_t ny = g.points(0), nx = g.points(1);
      for (std::size_t ky = 0; ky < ny; ++ky) {
        const double xiy = detail::wavenumber(g, 0, ky);
        for (std::size_t kx = 0; kx < nx; ++kx) {
          const double xi = a == 0 ? xiy : detail::wavenumber(g, 1, kx);
          num[ky * nx + kx] += xi * ghat[ky * nx + kx];
        }
      }
    }
  }

  std::vector<cplx> uhat(g.size());
  if (g.dim() == 1) {
    const std::size_t n = g.points(0);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == 0) {
        uhat[k] = comp.mean_u;  // forward-DFT zero bin is the field sum
        continue;
      }
      const double xi = detail::wavenumber(g, 0, k);
      uhat[k] = cplx(0.0, -1.0) * num[k] / (xi * xi);
    }
  } else {
    const std::size_t ny = g.points(0), nx = g.points(1);
    for (std::size_t ky = 0; ky < ny; ++ky) {
      const double xiy = detail::wavenumber(g, 0, ky);
      for (std::size_t kx = 0; kx < nx; ++kx) {
        const std::size_t idx = ky * nx + kx;
        if (ky == 0 && kx == 0) {
          uhat[idx] = comp.mean_u;
          continue;
        }
        // both-Nyquist bins carry an ambiguous sign; damp them to zero
        if (detail::is_nyquist(ky, ny) && detail::is_nyquist(kx, nx)) {
          uhat[idx] = 0.0;
          continue;
        }
        const double xix = detail::wavenumber(g, 1, kx);
        uhat[idx] = cplx(0.0, -1.0) * num[idx] / (xiy * xiy + xix * xix);
      }
    }
  }

  std::vector<double> u = detail::inverse_dft_real(std::move(uhat), g);
  std::vector<double> udot(g.size());
  for (std::size_t i = 0; i < udot.size(); ++i)
    udot[i] = speed.c[i] * comp.momentum[i];
  return WaveState(g, std::move(u), std::move(udot));
}

double energy(const EnergyComponents& comp) {
  double acc = 0.0;
  for (const auto& block : comp.grad)
    for (double v : block) acc += v * v;
  for (double v : comp.momentum) acc += v * v;
  return 0.5 * acc * comp.grid.cell_volume();
}

double energy(const WaveState& state, const SpeedField& speed, GradientScheme scheme) {
  return energy(to_energy_components(state, speed, scheme));
}

double energy_error(const WaveState& a, const WaveState& b, const SpeedField& speed,
                    GradientScheme scheme) {
  if (a.grid != b.grid)
    throw std::invalid_argument("energy_error: states live on different grids");
  const double ref = energy(b, speed, scheme);
  if (ref == 0.0)
    throw std::domain_error("energy_error: reference state has zero energy");
  return std::sqrt(energy(a - b, speed, scheme) / ref);
}

double l2_error(const WaveState& a, const WaveState& b) {
  if (a.grid != b.grid)
    throw std::invalid_argument("l2_error: states live on different grids");
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    const double d = a.u[i] - b.u[i];
    diff += d * d;
    ref += b.u[i] * b.u[i];
  }
  if (ref == 0.0) throw std::domain_error("l2_error: reference displacement is zero");
  return std::sqrt(diff / ref);
}

}  // namespace paratime
