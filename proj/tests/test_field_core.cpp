#include <doctest.h>

#include <cmath>

#include "paratime/grid.hpp"
#include "test_util.hpp"

using namespace paratime;
using namespace paratime::testutil;

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid({3}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({10}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({10}, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({10, 10, 10}, {1.0, 1.0, 1.0}), std::invalid_argument);
  const Grid g({8, 6}, {0.5, 0.25});
  CHECK(g.size() == 48);
  CHECK(g.extent(0) == doctest::Approx(4.0));
  CHECK(g.cell_volume() == doctest::Approx(0.125));
}

TEST_CASE("transfer construction rejects non-nested grids") {
  const Grid coarse({10}, {0.1});
  CHECK_THROWS_AS(GridTransfer(coarse, Grid({25}, {0.04}), InterpKind::linear),
                  std::invalid_argument);
  // same point ratio but different extent
  CHECK_THROWS_AS(GridTransfer(coarse, Grid({20}, {0.1}), InterpKind::linear),
                  std::invalid_argument);
  const GridTransfer t(coarse, Grid({20}, {0.05}), InterpKind::linear);
  CHECK(t.ratio[0] == 2);
}

TEST_CASE("restriction is pointwise evaluation at shared nodes") {
  const Grid coarse({10}, {0.1}), fine({100}, {0.01});
  const GridTransfer t(coarse, fine, InterpKind::fourier);

  std::vector<double> ones(100, 1.0);
  CHECK(max_abs_diff(restrict_field(ones, t), std::vector<double>(10, 1.0)) == 0.0);

  std::vector<double> sine(100);
  for (int i = 0; i < 100; ++i) sine[i] = std::sin(2.0 * M_PI * i / 100.0);
  const std::vector<double> r = restrict_field(sine, t);
  for (int j = 0; j < 10; ++j) CHECK(r[j] == sine[10 * j]);

  CHECK_THROWS_AS(restrict_field(std::vector<double>(50, 0.0), t), std::invalid_argument);
}

TEST_CASE("fourier interpolation reproduces band-limited modes exactly") {
  const Grid coarse({16}, {1.0 / 16}), fine({64}, {1.0 / 64});
  const GridTransfer t(coarse, fine, InterpKind::fourier);
  std::vector<double> mode(16);
  for (int i = 0; i < 16; ++i) mode[i] = std::cos(2.0 * M_PI * i / 16.0);
  const std::vector<double> out = interpolate_field(mode, t);
  for (int i = 0; i < 64; ++i)
    CHECK(out[i] == doctest::Approx(std::cos(2.0 * M_PI * i / 64.0)).epsilon(1e-12));
}

TEST_CASE("linear interpolation: constants and monotone segments") {
  const Grid coarse({8}, {0.125}), fine({32}, {0.125 / 4});
  const GridTransfer t(coarse, fine, InterpKind::linear);
  const std::vector<double> c(8, 3.25);
  CHECK(max_abs_diff(interpolate_field(c, t), std::vector<double>(32, 3.25)) == 0.0);

  auto rng = make_rng(7);
  const std::vector<double> u = random_field(coarse, rng);
  const std::vector<double> out = interpolate_field(u, t);
  for (int q = 0; q < 8; ++q) {
    const double lo = std::min(u[q], u[(q + 1) % 8]);
    const double hi = std::max(u[q], u[(q + 1) % 8]);
    for (int r = 0; r < 4; ++r) {
      CHECK(out[4 * q + r] >= lo - 1e-15);
      CHECK(out[4 * q + r] <= hi + 1e-15);
    }
  }
}

TEST_CASE("restrict(interpolate(U)) is the identity for both kinds") {
  auto rng = make_rng(11);
  for (const InterpKind kind : {InterpKind::fourier, InterpKind::linear}) {
    const Grid coarse({20}, {0.05}), fine({100}, {0.01});
    const GridTransfer t(coarse, fine, kind);
    for (int rep = 0; rep < 10; ++rep) {
      const std::vector<double> u = random_field(coarse, rng);
      const std::vector<double> back = restrict_field(interpolate_field(u, t), t);
      CHECK(max_abs_diff(back, u) <= 1e-12 * max_abs(u));
    }
  }
}

TEST_CASE("restrict(interpolate(U)) is the identity in 2D") {
  auto rng = make_rng(13);
  for (const InterpKind kind : {InterpKind::fourier, InterpKind::linear}) {
    const Grid coarse({6, 10}, {0.25, 0.1}), fine({18, 30}, {0.25 / 3, 0.1 / 3});
    const GridTransfer t(coarse, fine, kind);
    for (int rep = 0; rep < 6; ++rep) {
      const std::vector<double> u = random_field(coarse, rng);
      const std::vector<double> back = restrict_field(interpolate_field(u, t), t);
      CHECK(max_abs_diff(back, u) <= 1e-12 * max_abs(u));
    }
  }
}

TEST_CASE("fourier interpolation preserves the mean") {
  auto rng = make_rng(17);
  const Grid coarse({14}, {1.0 / 14}), fine({70}, {1.0 / 70});
  const GridTransfer t(coarse, fine, InterpKind::fourier);
  const std::vector<double> u = random_field(coarse, rng);
  const std::vector<double> out = interpolate_field(u, t);
  double mc = 0.0, mf = 0.0;
  for (double v : u) mc += v;
  for (double v : out) mf += v;
  mc /= 14.0;
  mf /= 70.0;
  CHECK(std::abs(mf - mc) <= 1e-12 * std::max(1.0, std::abs(mc)));
}

TEST_CASE("state transfer applies to both components") {
  auto rng = make_rng(23);
  const Grid coarse({12}, {1.0 / 12}), fine({48}, {1.0 / 48});
  const GridTransfer t(coarse, fine, InterpKind::fourier);
  const WaveState s = random_state(coarse, rng);
  const WaveState fine_s = interpolate_state(s, t);
  const WaveState back = restrict_state(fine_s, t);
  CHECK(max_abs_diff(back.u, s.u) <= 1e-12 * max_abs(s.u));
  CHECK(max_abs_diff(back.udot, s.udot) <= 1e-12 * max_abs(s.udot));
  CHECK_THROWS_AS(restrict_state(s, t), std::invalid_argument);
  CHECK_THROWS_AS(interpolate_state(fine_s, t), std::invalid_argument);
}

TEST_CASE("resize_speed evaluates the fine speed at coinciding nodes") {
  const Grid coarse({100}, {0.01}), fine({1000}, {0.001});
  std::vector<double> c(1000);
  for (int i = 0; i < 1000; ++i)
    c[i] = 1.0 + 0.25 * std::cos(4.0 * M_PI * (-0.5 + i * 0.001));
  const SpeedField fine_speed(fine, c);
  const SpeedField coarse_speed = resize_speed(fine_speed, coarse);
  for (int j = 0; j < 100; ++j) CHECK(coarse_speed.c[j] == c[10 * j]);

  const SpeedField ones(fine, std::vector<double>(1000, 1.0));
  CHECK(max_abs_diff(resize_speed(ones, coarse).c, std::vector<double>(100, 1.0)) == 0.0);

  CHECK_THROWS_AS(resize_speed(fine_speed, Grid({300}, {1.0 / 300})),
                  std::invalid_argument);
}

TEST_CASE("resize_speed keeps the inclusion indicator at coarse nodes") {
  // disc of radius^2 0.002 at (0.5, -0.1) in the (y, x) strip [-0.5,0.5)x[-1,1)
  const Grid fine({100, 200}, {0.01, 0.01}), coarse({20, 40}, {0.05, 0.05});
  const double oy = -0.5, ox = -1.0;
  std::vector<double> c(fine.size());
  const auto speed_at = [&](double y, double x) {
    const double d2 = (x - 0.5) * (x - 0.5) + (y + 0.1) * (y + 0.1);
    return d2 < 0.002 ? 0.1 : 1.0;
  };
  for (int iy = 0; iy < 100; ++iy)
    for (int ix = 0; ix < 200; ++ix)
      c[iy * 200 + ix] = speed_at(oy + iy * 0.01, ox + ix * 0.01);
  const SpeedField coarse_speed = resize_speed(SpeedField(fine, c), coarse);
  for (int jy = 0; jy < 20; ++jy)
    for (int jx = 0; jx < 40; ++jx)
      CHECK(coarse_speed.c[jy * 40 + jx] == speed_at(oy + jy * 0.05, ox + jx * 0.05));
}

TEST_CASE("bilinear resample handles tiny sources and constants") {
  const std::vector<double> ones(4, 1.0);
  const std::vector<double> out = bilinear_resample(ones, 2, 2, 4, 4);
  CHECK(max_abs_diff(out, std::vector<double>(16, 1.0)) == 0.0);

  auto rng = make_rng(31);
  const Grid g({8, 12}, {1.0, 1.0});
  const std::vector<double> f = random_field(g, rng);
  CHECK(max_abs_diff(bilinear_resample(f, g, g), f) == 0.0);
}
