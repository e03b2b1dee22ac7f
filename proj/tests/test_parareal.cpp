#include <doctest.h>

#include <cmath>
#include <limits>

#include "paratime/parareal.hpp"
#include "test_util.hpp"

using namespace paratime;
using namespace paratime::testutil;

namespace {

SpeedField unit_speed(const Grid& g) {
  return SpeedField(g, std::vector<double>(g.size(), 1.0));
}

struct ToySetup {
  Grid fine_grid;
  Grid coarse_grid;
  CouplingSchedule schedule;
  GridTransfer transfer;
  WaveState init;
};

// small 1D setup: N couplings, coarse = fine grid unless ratio > 1
ToySetup toy(std::size_t n_coarse, std::size_t ratio, std::size_t n_couplings,
             std::size_t m_t = 4) {
  const Grid coarse({n_coarse}, {1.0 / static_cast<double>(n_coarse)});
  const std::size_t nf = n_coarse * ratio;
  const Grid fine({nf}, {1.0 / static_cast<double>(nf)});
  const double dt_com = 0.05;
  const double dt_coarse = dt_com / 5.0;
  const double dt_fine = dt_coarse / static_cast<double>(m_t);
  PropagatorConfig fine_cfg(fine, unit_speed(fine), dt_fine, 5 * m_t);
  PropagatorConfig coarse_cfg(coarse, unit_speed(coarse), dt_coarse, 5);
  CouplingSchedule schedule(dt_com * static_cast<double>(n_couplings), dt_com,
                            n_couplings, fine_cfg, coarse_cfg);
  GridTransfer transfer(coarse, fine, InterpKind::fourier);
  // band-limited initial data: in the constant medium the states stay
  // Nyquist-free, which the reduction-to-plain-parareal check relies on
  WaveState init(fine);
  for (std::size_t i = 0; i < nf; ++i) {
    const double x = -0.5 + static_cast<double>(i) / static_cast<double>(nf);
    init.u[i] = std::cos(8.0 * M_PI * x) + 0.3 * std::cos(2.0 * M_PI * x);
    init.udot[i] = 0.5 * std::sin(4.0 * M_PI * x);
  }
  return {fine, coarse, schedule, transfer, init};
}

double state_diff(const WaveState& a, const WaveState& b) {
  return std::max(rel_l2_diff(a.u, b.u), rel_l2_diff(a.udot, b.udot));
}

}  // namespace

TEST_CASE("schedule validates the coupling arithmetic") {
  const Grid g({16}, {0.0625});
  PropagatorConfig cfg(g, unit_speed(g), 0.01, 5);
  CHECK_NOTHROW(CouplingSchedule(0.5, 0.05, 10, cfg, cfg));
  CHECK_THROWS_AS(CouplingSchedule(0.6, 0.05, 10, cfg, cfg), std::invalid_argument);
  PropagatorConfig off(g, unit_speed(g), 0.011, 5);
  CHECK_THROWS_AS(CouplingSchedule(0.5, 0.05, 10, cfg, off), std::invalid_argument);
}

TEST_CASE("serial fine: endpoints and composition") {
  const ToySetup s = toy(32, 1, 3);
  const auto states = serial_fine(s.init, s.schedule);
  REQUIRE(states.size() == 4);
  CHECK(state_diff(states[0], s.init) == 0.0);
  WaveState manual = s.init;
  for (int n = 0; n < 3; ++n) manual = propagate_coupling(manual, s.schedule.fine_cfg);
  CHECK(state_diff(states[3], manual) == 0.0);

  const auto zero = serial_fine(WaveState(s.fine_grid), s.schedule);
  CHECK(max_abs(zero[3].u) == 0.0);
}

TEST_CASE("plain parareal is exact at couplings n <= k") {
  const ToySetup s = toy(32, 2, 6, 2);
  const ParaRun run = plain_parareal(s.init, s.schedule, s.transfer, 6);
  REQUIRE(run.iterations.size() == 7);
  for (std::size_t k = 0; k < run.iterations.size(); ++k)
    for (std::size_t n = 0; n <= std::min<std::size_t>(k, 6); ++n)
      CHECK(run.iterations[k].energy_err[n] <= 1e-10);
  // and the full-iteration run reproduces serial fine everywhere
  for (std::size_t n = 0; n <= 6; ++n)
    CHECK(state_diff(run.iterations[6].states[n], run.reference[n]) <= 1e-12);
}

TEST_CASE("plain parareal with identical propagators converges in one pass") {
  const ToySetup s = toy(32, 1, 5, 1);
  // coarse config equals the fine one
  CouplingSchedule same(s.schedule.T, s.schedule.dt_com, 5, s.schedule.fine_cfg,
                        s.schedule.fine_cfg);
  const ParaRun run = plain_parareal(s.init, same, GridTransfer(s.fine_grid, s.fine_grid,
                                                                InterpKind::fourier), 1);
  for (std::size_t n = 0; n <= 5; ++n)
    CHECK(state_diff(run.iterations[1].states[n], run.reference[n]) <= 1e-12);
}

TEST_CASE("identity-corrector theta with spectral data reduces to plain parareal") {
  const ToySetup s = toy(40, 1, 5);
  const ParaRun plain = plain_parareal(s.init, s.schedule, s.transfer, 4);
  ThetaOptions opts;
  opts.scheme = GradientScheme::spectral;
  opts.tol = 1e-15;
  opts.omega_identity = true;
  const ParaRun theta = theta_parareal(s.init, s.schedule, s.transfer, 4, opts);
  for (std::size_t k = 0; k < plain.iterations.size(); ++k)
    for (std::size_t n = 0; n <= 5; ++n)
      CHECK(state_diff(theta.iterations[k].states[n], plain.iterations[k].states[n]) <=
            1e-12);
}

TEST_CASE("theta parareal is exact at couplings n <= k regardless of the corrector") {
  const ToySetup s = toy(24, 2, 5, 2);
  ThetaOptions opts;
  opts.scheme = GradientScheme::fd2;
  opts.tol = 1e-14;
  const ParaRun run = theta_parareal(s.init, s.schedule, s.transfer, 5, opts);
  REQUIRE(run.iterations.size() == 6);
  for (std::size_t k = 0; k < run.iterations.size(); ++k)
    for (std::size_t n = 0; n <= std::min<std::size_t>(k, 5); ++n)
      CHECK(run.iterations[k].energy_err[n] <= 1e-10);
  // residual and rank histories are recorded for every pass
  for (std::size_t k = 1; k < run.iterations.size(); ++k) {
    CHECK(std::isfinite(run.iterations[k].residual));
    CHECK(run.iterations[k].rank > 0);
  }
}

TEST_CASE("driver results do not depend on the worker count") {
  const ToySetup s = toy(32, 1, 6);
  ThetaOptions a;
  a.scheme = GradientScheme::fd4;
  a.tol = 1e-13;
  a.driver.workers = 1;
  ThetaOptions b = a;
  b.driver.workers = 7;
  const ParaRun ra = theta_parareal(s.init, s.schedule, s.transfer, 3, a);
  const ParaRun rb = theta_parareal(s.init, s.schedule, s.transfer, 3, b);
  for (std::size_t k = 0; k < ra.iterations.size(); ++k)
    for (std::size_t n = 0; n <= 6; ++n) {
      CHECK(ra.iterations[k].energy_err[n] == rb.iterations[k].energy_err[n]);
      CHECK(state_diff(ra.iterations[k].states[n], rb.iterations[k].states[n]) == 0.0);
    }
  // the initial condition is never modified by the iteration
  for (const auto& rec : ra.iterations) CHECK(state_diff(rec.states[0], s.init) == 0.0);
}

TEST_CASE("corrected coarse propagation starts from the serial coarse run") {
  const ToySetup s = toy(32, 1, 4);
  ThetaOptions opts;
  opts.scheme = GradientScheme::fd4;
  opts.tol = 1e-13;
  const ParaRun run = corrected_coarse_only(s.init, s.schedule, s.transfer, 2, opts);

  // iterate 0 is the plain serial coarse sweep
  WaveState coarse_state = s.init;
  for (std::size_t n = 1; n <= 4; ++n) {
    coarse_state = interpolate_state(
        propagate_coupling(restrict_state(coarse_state, s.transfer), s.schedule.coarse_cfg),
        s.transfer);
    CHECK(state_diff(run.iterations[0].states[n], coarse_state) <= 1e-14);
  }

  // the corrected coarse propagator does not pump energy beyond the coarse drift
  const SpeedField& fine_speed = s.schedule.fine_cfg.speed;
  double coarse_max = 0.0, theta_max = 0.0;
  const double e0 = energy(s.init, fine_speed, GradientScheme::fd4);
  for (std::size_t n = 0; n <= 4; ++n) {
    coarse_max = std::max(coarse_max,
                          energy(run.iterations[0].states[n], fine_speed, GradientScheme::fd4));
    theta_max = std::max(theta_max,
                         energy(run.iterations[1].states[n], fine_speed, GradientScheme::fd4));
  }
  CHECK(theta_max <= coarse_max * (1.0 + 1e-10));
  CHECK(theta_max <= e0 * 1.01);
}

TEST_CASE("a non-finite initial state flags divergence and the run continues") {
  const ToySetup s = toy(32, 1, 3);
  WaveState bad = s.init;
  bad.u[0] = std::numeric_limits<double>::quiet_NaN();
  ThetaOptions opts;
  opts.scheme = GradientScheme::fd2;
  opts.tol = 1e-12;
  const ParaRun run = theta_parareal(bad, s.schedule, s.transfer, 2, opts);
  REQUIRE(run.iterations.size() == 3);
  CHECK(run.iterations[0].diverged);
  for (std::size_t k = 0; k < run.iterations.size(); ++k)
    CHECK(std::isinf(run.iterations[k].energy_err.back()));
}

TEST_CASE("speedup estimate follows the min formula") {
  CHECK(speedup_estimate(20, 1, 20, 1, 100, 4) == doctest::Approx(0.05));
  CHECK(speedup_estimate(1, 2, 3, 2, 5, 1) <= 1.0 + 1e-15);
  CHECK(speedup_estimate(64, 10, 100, 2, 200, 5) ==
        doctest::Approx(std::min({64.0, 1e4, 50.0}) / 5.0));
  CHECK_THROWS_AS(speedup_estimate(0, 1, 1, 1, 1, 1), std::invalid_argument);
  // full expression degrades to ~n_cpu/K when the coarse work is negligible
  const double s = speedup_full(16, 2, 1e-4, 1e-2, 0.05, 1000, 10, 100);
  CHECK(s > 0.0);
  CHECK(s <= 16.0 / 2.0 + 1e-12);
}

TEST_CASE("driver rejects mismatched inputs") {
  const ToySetup s = toy(32, 2, 3, 2);
  CHECK_THROWS_AS(plain_parareal(WaveState(s.coarse_grid), s.schedule, s.transfer, 2),
                  std::invalid_argument);
  ThetaOptions opts;
  CHECK_THROWS_AS(theta_parareal(s.init, s.schedule,
                                 GridTransfer(s.coarse_grid, s.coarse_grid,
                                              InterpKind::linear),
                                 2, opts),
                  std::invalid_argument);
}
