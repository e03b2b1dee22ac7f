#pragma once

#include <cstddef>
#include <vector>

namespace paratime {

// Field storage convention used by every module and file format in this
// project: fields are flat row-major arrays over a uniform periodic box.
// In 2D axis 0 is y (slow index, file rows) and axis 1 is x (fast index,
// file columns): flat index = iy*nx + ix. In 1D the single axis is x.
// Gradient blocks, snapshot-matrix stacking and the speed-field text
// format all follow this ordering.

/// Uniform periodic Cartesian grid in 1 or 2 dimensions.
class Grid {
 public:
  Grid(std::vector<std::size_t> points_per_axis, std::vector<double> spacing);

  int dim() const { return static_cast<int>(n_.size()); }
  std::size_t points(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  double extent(int axis) const {
    return static_cast<double>(points(axis)) * spacing(axis);
  }
  /// Total node count (product over axes).
  std::size_t size() const;
  /// Cell volume, product of spacings.
  double cell_volume() const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  std::vector<std::size_t> n_;
  std::vector<double> h_;
};

/// Displacement/velocity pair sampled on one grid.
struct WaveState {
  Grid grid;
  std::vector<double> u;
  std::vector<double> udot;

  WaveState(Grid g, std::vector<double> u_in, std::vector<double> udot_in);
  /// Zero state on g.
  explicit WaveState(Grid g);

  bool finite() const;
};

// element-wise state arithmetic (same grid required)
WaveState operator+(const WaveState& a, const WaveState& b);
WaveState operator-(const WaveState& a, const WaveState& b);
WaveState operator*(double s, const WaveState& a);

/// Strictly positive wave speed c(x) on a grid.
struct SpeedField {
  Grid grid;
  std::vector<double> c;

  SpeedField(Grid g, std::vector<double> c_in);
};

enum class InterpKind { fourier, linear };

/// Couples a coarse and a fine grid whose node sets coincide
/// (integer ratio per axis, equal extents).
struct GridTransfer {
  Grid coarse;
  Grid fine;
  std::vector<std::size_t> ratio;
  InterpKind kind;

  GridTransfer(Grid coarse_in, Grid fine_in, InterpKind kind_in);
  bool identity() const;  // ratio 1 on every axis
};

/// Pointwise evaluation at the shared nodes: out[j] = in[ratio*j].
std::vector<double> restrict_field(const std::vector<double>& fine_field,
                                   const GridTransfer& transfer);
WaveState restrict_state(const WaveState& state, const GridTransfer& transfer);

/// Coarse-to-fine interpolation (trigonometric with split Nyquist, or
/// piecewise multilinear with periodic wrap). Agrees with the input at
/// shared nodes; restrict_field(interpolate_field(U)) == U.
std::vector<double> interpolate_field(const std::vector<double>& coarse_field,
                                      const GridTransfer& transfer);
WaveState interpolate_state(const WaveState& state, const GridTransfer& transfer);

/// Coarse speed = pointwise evaluation of the fine speed at coinciding
/// nodes. Rejects non-nested grids.
SpeedField resize_speed(const SpeedField& fine_speed, const Grid& coarse);

/// Periodic bilinear resampling onto an arbitrary target grid. Ingestion
/// utility for externally supplied speed models; not used by the solver
/// transfer path, which is exact.
std::vector<double> bilinear_resample(const std::vector<double>& src,
                                      const Grid& src_grid, const Grid& dst_grid);

/// Raw-shape variant (ny=1 for 1D); accepts sources too small to form a Grid.
std::vector<double> bilinear_resample(const std::vector<double>& src, std::size_t src_ny,
                                      std::size_t src_nx, std::size_t dst_ny,
                                      std::size_t dst_nx);

}  // namespace paratime
