#include "paratime/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "paratime/fft.hpp"

namespace paratime {

namespace {

void check_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Grid::Grid(std::vector<std::size_t> points_per_axis, std::vector<double> spacing)
    : n_(std::move(points_per_axis)), h_(std::move(spacing)) {
  if (n_.empty() || n_.size() > 2 || n_.size() != h_.size())
    throw std::invalid_argument("Grid: dimension must be 1 or 2 with matching spacing");
  for (std::size_t a = 0; a < n_.size(); ++a) {
    if (n_[a] < 4) throw std::invalid_argument("Grid: need at least 4 points per axis");
    if (!(h_[a] > 0.0) || !std::isfinite(h_[a]))
      throw std::invalid_argument("Grid: spacing must be positive");
  }
}

std::size_t Grid::size() const {
  std::size_t total = 1;
  for (std::size_t n : n_) total *= n;
  return total;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double h : h_) v *= h;
  return v;
}

bool Grid::operator==(const Grid& other) const {
  return n_ == other.n_ && h_ == other.h_;
}

WaveState::WaveState(Grid g, std::vector<double> u_in, std::vector<double> udot_in)
    : grid(std::move(g)), u(std::move(u_in)), udot(std::move(udot_in)) {
  if (u.size() != grid.size() || udot.size() != grid.size())
    throw std::invalid_argument("WaveState: field size does not match grid");
}

WaveState::WaveState(Grid g)
    : grid(std::move(g)), u(grid.size(), 0.0), udot(grid.size(), 0.0) {}

bool WaveState::finite() const { return all_finite(u) && all_finite(udot); }

WaveState operator+(const WaveState& a, const WaveState& b) {
  check_same_grid(a.grid, b.grid, "state add");
  WaveState out = a;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] += b.u[i];
    out.udot[i] += b.udot[i];
  }
  return out;
}

WaveState operator-(const WaveState& a, const WaveState& b) {
  check_same_grid(a.grid, b.grid, "state subtract");
  WaveState out = a;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] -= b.u[i];
    out.udot[i] -= b.udot[i];
  }
  return out;
}

WaveState operator*(double s, const WaveState& a) {
  WaveState out = a;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] *= s;
    out.udot[i] *= s;
  }
  return out;
}

SpeedField::SpeedField(Grid g, std::vector<double> c_in)
    : grid(std::move(g)), c(std::move(c_in)) {
  if (c.size() != grid.size())
    throw std::invalid_argument("SpeedField: field size does not match grid");
  for (double v : c)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("SpeedField: wave speed must be strictly positive and finite");
}

GridTransfer::GridTransfer(Grid coarse_in, Grid fine_in, InterpKind kind_in)
    : coarse(std::move(coarse_in)), fine(std::move(fine_in)), kind(kind_in) {
  if (coarse.dim() != fine.dim())
    throw std::invalid_argument("GridTransfer: dimension mismatch");
  for (int a = 0; a < coarse.dim(); ++a) {
    const std::size_t nc = coarse.points(a), nf = fine.points(a);
    if (nf % nc != 0)
      throw std::invalid_argument("GridTransfer: fine points must be an integer multiple of coarse points");
    const std::size_t r = nf / nc;
    ratio.push_back(r);
    // coinciding node sets require equal extents
    const double ec = coarse.extent(a), ef = fine.extent(a);
    if (std::abs(ec - ef) > 1e-12 * std::max(ec, ef))
      throw std::invalid_argument("GridTransfer: coarse and fine extents differ; grids are not nested");
  }
}

bool GridTransfer::identity() const {
  return std::all_of(ratio.begin(), ratio.end(), [](std::size_t r) { return r == 1; });
}

std::vector<double> restrict_field(const std::vector<double>& fine_field,
                                   const GridTransfer& transfer) {
  if (fine_field.size() != transfer.fine.size())
    throw std::invalid_argument("restrict_field: input does not live on the fine grid");
  const Grid& cg = transfer.coarse;
  std::vector<double> out(cg.size());
  if (cg.dim() == 1) {
    const std::size_t r = transfer.ratio[0];
    for (std::size_t j = 0; j < cg.points(0); ++j) out[j] = fine_field[j * r];
  } else {
    const std::size_t ry = transfer.ratio[0], rx = transfer.ratio[1];
    const std::size_t ncx = cg.points(1), nfx = transfer.fine.points(1);
    for (std::size_t jy = 0; jy < cg.points(0); ++jy)
      for (std::size_t jx = 0; jx < ncx; ++jx)
        out[jy * ncx + jx] = fine_field[(jy * ry) * nfx + jx * rx];
  }
  return out;
}

WaveState restrict_state(const WaveState& state, const GridTransfer& transfer) {
  if (state.grid != transfer.fine)
    throw std::invalid_argument("restrict_state: state does not live on the fine grid");
  return WaveState(transfer.coarse, restrict_field(state.u, transfer),
                   restrict_field(state.udot, transfer));
}

namespace {

// 1D trigonometric interpolation n -> r*n. The unmatched Nyquist mode of an
// even-length input is split evenly between +-Nyquist so the result is real.
std::vector<double> fourier_interp_line(const std::vector<double>& line, std::size_t r) {
  using cplx = std::complex<double>;
  const std::size_t n = line.size(), m = n * r;
  if (r == 1) return line;
  std::vector<cplx> spec(n);
  for (std::size_t i = 0; i < n; ++i) spec[i] = line[i];
  detail::dft_line(spec.data(), n, false);

  const double scale = static_cast<double>(m) / static_cast<double>(n);
  std::vector<cplx> pad(m, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    if (detail::is_nyquist(k, n)) {
      const cplx half = 0.5 * scale * spec[k];
      pad[n / 2] += half;        // +n/2 bin of the fine spectrum
      pad[m - n / 2] += half;    // -n/2 bin
    } else {
      const long s = detail::signed_freq(k, n);
      const std::size_t kf = s >= 0 ? static_cast<std::size_t>(s)
                                    : m - static_cast<std::size_t>(-s);
      pad[kf] = scale * spec[k];
    }
  }
  detail::dft_line(pad.data(), m, true);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = pad[i].real();
  return out;
}

std::vector<double> linear_interp_line(const std::vector<double>& line, std::size_t r) {
  const std::size_t n = line.size(), m = n * r;
  if (r == 1) return line;
  std::vector<double> out(m);
  for (std::size_t q = 0; q < n; ++q) {
    const double a = line[q], b = line[(q + 1) % n];
    for (std::size_t rem = 0; rem < r; ++rem) {
      const double t = static_cast<double>(rem) / static_cast<double>(r);
      out[q * r + rem] = (1.0 - t) * a + t * b;
    }
  }
  return out;
}

std::vector<double> interp_line(const std::vector<double>& line, std::size_t r,
                                InterpKind kind) {
  return kind == InterpKind::fourier ? fourier_interp_line(line, r)
                                     : linear_interp_line(line, r);
}

}  // namespace

std::vector<double> interpolate_field(const std::vector<double>& coarse_field,
                                      const GridTransfer& transfer) {
  if (coarse_field.size() != transfer.coarse.size())
    throw std::invalid_argument("interpolate_field: input does not live on the coarse grid");
  const Grid& cg = transfer.coarse;
  if (cg.dim() == 1) return interp_line(coarse_field, transfer.ratio[0], transfer.kind);

  // 2D: interpolate along x within each row, then along y within each column.
  const std::size_t ny = cg.points(0), nx = cg.points(1);
  const std::size_t ry = transfer.ratio[0], rx = transfer.ratio[1];
  const std::size_t mx = nx * rx, my = ny * ry;

  std::vector<double> half(ny * mx);
  std::vector<double> row(nx);
  for (std::size_t jy = 0; jy < ny; ++jy) {
    std::copy_n(coarse_field.begin() + static_cast<long>(jy * nx), nx, row.begin());
    const std::vector<double> wide = interp_line(row, rx, transfer.kind);
    std::copy(wide.begin(), wide.end(), half.begin() + static_cast<long>(jy * mx));
  }

  std::vector<double> out(my * mx);
  std::vector<double> col(ny);
  for (std::size_t jx = 0; jx < mx; ++jx) {
    for (std::size_t jy = 0; jy < ny; ++jy) col[jy] = half[jy * mx + jx];
    const std::vector<double> tall = interp_line(col, ry, transfer.kind);
    for (std::size_t jy = 0; jy < my; ++jy) out[jy * mx + jx] = tall[jy];
  }
  return out;
}

WaveState interpolate_state(const WaveState& state, const GridTransfer& transfer) {
  if (state.grid != transfer.coarse)
    throw std::invalid_argument("interpolate_state: state does not live on the coarse grid");
  return WaveState(transfer.fine, interpolate_field(state.u, transfer),
                   interpolate_field(state.udot, transfer));
}

SpeedField resize_speed(const SpeedField& fine_speed, const Grid& coarse) {
  // InterpKind is irrelevant for the pointwise direction; transfer validates nesting.
  GridTransfer transfer(coarse, fine_speed.grid, InterpKind::linear);
  return SpeedField(coarse, restrict_field(fine_speed.c, transfer));
}

namespace {

// periodic linear weight lookup along one axis of the source grid
struct AxisSample {
  std::size_t i0, i1;
  double w1;
};

AxisSample axis_sample(double pos, std::size_t n) {
  // pos in source index units, already wrapped to [0, n)
  const double f = std::floor(pos);
  AxisSample s;
  s.i0 = static_cast<std::size_t>(f) % n;
  s.i1 = (s.i0 + 1) % n;
  s.w1 = pos - f;
  return s;
}

}  // namespace

std::vector<double> bilinear_resample(const std::vector<double>& src, std::size_t src_ny,
                                      std::size_t src_nx, std::size_t dst_ny,
                                      std::size_t dst_nx) {
  if (src.size() != src_ny * src_nx)
    throw std::invalid_argument("bilinear_resample: field size does not match source shape");
  if (src_ny == 0 || src_nx == 0 || dst_ny == 0 || dst_nx == 0)
    throw std::invalid_argument("bilinear_resample: empty shape");
  std::vector<double> out(dst_ny * dst_nx);
  const double sy = static_cast<double>(src_ny) / static_cast<double>(dst_ny);
  const double sx = static_cast<double>(src_nx) / static_cast<double>(dst_nx);
  for (std::size_t jy = 0; jy < dst_ny; ++jy) {
    const AxisSample ay = axis_sample(static_cast<double>(jy) * sy, src_ny);
    for (std::size_t jx = 0; jx < dst_nx; ++jx) {
      const AxisSample ax = axis_sample(static_cast<double>(jx) * sx, src_nx);
      out[jy * dst_nx + jx] =
          (1.0 - ay.w1) * ((1.0 - ax.w1) * src[ay.i0 * src_nx + ax.i0] +
                           ax.w1 * src[ay.i0 * src_nx + ax.i1]) +
          ay.w1 * ((1.0 - ax.w1) * src[ay.i1 * src_nx + ax.i0] +
                   ax.w1 * src[ay.i1 * src_nx + ax.i1]);
    }
  }
  return out;
}

std::vector<double> bilinear_resample(const std::vector<double>& src,
                                      const Grid& src_grid, const Grid& dst_grid) {
  if (src.size() != src_grid.size())
    throw std::invalid_argument("bilinear_resample: field size does not match source grid");
  if (src_grid.dim() != dst_grid.dim())
    throw std::invalid_argument("bilinear_resample: dimension mismatch");
  if (src_grid.dim() == 1)
    return bilinear_resample(src, 1, src_grid.points(0), 1, dst_grid.points(0));
  return bilinear_resample(src, src_grid.points(0), src_grid.points(1),
                           dst_grid.points(0), dst_grid.points(1));
}

}  // namespace paratime
