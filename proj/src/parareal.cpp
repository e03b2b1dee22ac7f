#include "paratime/parareal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "paratime/errors.hpp"

namespace paratime {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static partition of [begin, end) over worker threads. Every index writes
// only its own slots, so scheduling cannot affect results.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, int workers, Fn&& fn) {
  const std::size_t count = end - begin;
  if (count == 0) return;
  const int n_threads = std::min<std::size_t>(resolve_workers(workers), count);
  if (n_threads <= 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  const std::size_t chunk = (count + static_cast<std::size_t>(n_threads) - 1) /
                            static_cast<std::size_t>(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    const std::size_t lo = begin + static_cast<std::size_t>(t) * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn]() {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

WaveState nan_state(const Grid& grid) {
  WaveState s(grid);
  std::fill(s.u.begin(), s.u.end(), kNaN);
  std::fill(s.udot.begin(), s.udot.end(), kNaN);
  return s;
}

// Propagators wrapped so a divergence yields a NaN state instead of
// unwinding a worker thread; the iterate-level scan flags and clamps.
WaveState fine_stage(const WaveState& s, const PropagatorConfig& cfg) {
  try {
    return propagate_coupling(s, cfg);
  } catch (const PropagationDiverged&) {
    return nan_state(cfg.grid);
  }
}

WaveState coarse_stage(const WaveState& fine_state, const CouplingSchedule& schedule,
                       const GridTransfer& transfer) {
  try {
    return propagate_coupling(restrict_state(fine_state, transfer), schedule.coarse_cfg);
  } catch (const PropagationDiverged&) {
    return nan_state(transfer.coarse);
  }
}

struct ErrorPair {
  double energy;
  double l2;
};

ErrorPair measure(const WaveState& state, const WaveState& ref, const SpeedField& speed,
                  GradientScheme scheme) {
  if (!state.finite() || !ref.finite()) return {kInf, kInf};
  ErrorPair e{0.0, 0.0};
  const double ref_energy = energy(ref, speed, scheme);
  if (ref_energy == 0.0) {
    e.energy = energy(state - ref, speed, scheme) == 0.0 ? 0.0 : kInf;
  } else {
    e.energy = energy_error(state, ref, speed, scheme);
  }
  double ref_l2 = 0.0;
  for (double v : ref.u) ref_l2 += v * v;
  if (ref_l2 == 0.0) {
    double diff = 0.0;
    for (std::size_t i = 0; i < state.u.size(); ++i) {
      const double d = state.u[i] - ref.u[i];
      diff += d * d;
    }
    e.l2 = diff == 0.0 ? 0.0 : kInf;
  } else {
    e.l2 = l2_error(state, ref);
  }
  return e;
}

// Records errors, flags non-finite states, and clamps them to the previous
// iterate so later passes keep running on finite data.
IterationRecord finalize_iteration(std::vector<WaveState>& states,
                                   const std::vector<WaveState>* previous,
                                   const ParaRun& run, const CouplingSchedule& schedule,
                                   const DriverOptions& options) {
  IterationRecord rec;
  const std::size_t count = states.size();
  rec.energy_err.resize(count);
  rec.l2_err.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    const ErrorPair e = n == 0 ? ErrorPair{0.0, 0.0}
                               : measure(states[n], run.reference[n],
                                         schedule.fine_cfg.speed, options.metric_scheme);
    rec.energy_err[n] = e.energy;
    rec.l2_err[n] = e.l2;
    if (!states[n].finite()) {
      rec.diverged = true;
      if (previous) states[n] = (*previous)[n];
    }
  }
  if (options.keep_states) rec.states = states;
  return rec;
}

// Reference for the error metrics. If the fine propagation itself blows up
// the run is still carried out with non-finite reference slots; every
// iterate then reports infinite errors and the divergence flag.
std::vector<WaveState> reference_or_nan(const WaveState& init,
                                        const CouplingSchedule& schedule) {
  try {
    return serial_fine(init, schedule);
  } catch (const PropagationDiverged&) {
    std::vector<WaveState> states;
    states.reserve(schedule.n_couplings + 1);
    states.push_back(init);
    for (std::size_t n = 1; n <= schedule.n_couplings; ++n)
      states.push_back(nan_state(schedule.fine_cfg.grid));
    return states;
  }
}

std::vector<WaveState> serial_coarse_init(const WaveState& init,
                                          const CouplingSchedule& schedule,
                                          const GridTransfer& transfer) {
  std::vector<WaveState> states;
  states.reserve(schedule.n_couplings + 1);
  states.push_back(init);
  for (std::size_t n = 1; n <= schedule.n_couplings; ++n) {
    const WaveState coarse = coarse_stage(states[n - 1], schedule, transfer);
    states.push_back(coarse.finite() ? interpolate_state(coarse, transfer)
                                     : nan_state(transfer.fine));
  }
  return states;
}

void validate_driver_inputs(const WaveState& init, const CouplingSchedule& schedule,
                            const GridTransfer& transfer, int iterations) {
  if (init.grid != schedule.fine_cfg.grid)
    throw std::invalid_argument("parareal: initial state must live on the fine grid");
  if (transfer.fine != schedule.fine_cfg.grid || transfer.coarse != schedule.coarse_cfg.grid)
    throw std::invalid_argument("parareal: transfer does not couple the schedule grids");
  if (iterations < 0) throw std::invalid_argument("parareal: negative iteration count");
}

}  // namespace

CouplingSchedule::CouplingSchedule(double T_in, double dt_com_in, std::size_t n,
                                   PropagatorConfig fine, PropagatorConfig coarse)
    : T(T_in), dt_com(dt_com_in), n_couplings(n), fine_cfg(std::move(fine)),
      coarse_cfg(std::move(coarse)) {
  if (!(T > 0.0) || !(dt_com > 0.0) || n_couplings == 0)
    throw std::invalid_argument("CouplingSchedule: T, dt_com, N must be positive");
  if (std::abs(static_cast<double>(n_couplings) * dt_com - T) > 1e-9 * T)
    throw std::invalid_argument("CouplingSchedule: N * dt_com must equal T");
  const auto check = [this](const PropagatorConfig& cfg, const char* which) {
    const double span = static_cast<double>(cfg.steps_per_coupling) * cfg.dt;
    if (std::abs(span - dt_com) > 1e-12 * dt_com)
      throw std::invalid_argument(std::string("CouplingSchedule: ") + which +
                                  " steps_per_coupling * dt != dt_com");
  };
  check(fine_cfg, "fine");
  check(coarse_cfg, "coarse");
}

std::vector<WaveState> serial_fine(const WaveState& init, const CouplingSchedule& schedule) {
  if (init.grid != schedule.fine_cfg.grid)
    throw std::invalid_argument("serial_fine: initial state must live on the fine grid");
  std::vector<WaveState> states;
  states.reserve(schedule.n_couplings + 1);
  states.push_back(init);
  for (std::size_t n = 1; n <= schedule.n_couplings; ++n)
    states.push_back(propagate_coupling(states[n - 1], schedule.fine_cfg));
  return states;
}

ParaRun plain_parareal(const WaveState& init, const CouplingSchedule& schedule,
                       const GridTransfer& transfer, int iterations,
                       const DriverOptions& options) {
  validate_driver_inputs(init, schedule, transfer, iterations);
  const std::size_t N = schedule.n_couplings;

  ParaRun run;
  run.reference = reference_or_nan(init, schedule);

  std::vector<WaveState> current = serial_coarse_init(init, schedule, transfer);
  run.iterations.push_back(finalize_iteration(current, nullptr, run, schedule, options));

  std::vector<WaveState> fine_next(N + 1, WaveState(transfer.fine));
  std::vector<WaveState> coarse_next(N + 1, WaveState(transfer.fine));
  for (int k = 1; k <= iterations; ++k) {
    parallel_for(1, N + 1, options.workers, [&](std::size_t n) {
      fine_next[n] = fine_stage(current[n - 1], schedule.fine_cfg);
      const WaveState coarse = coarse_stage(current[n - 1], schedule, transfer);
      coarse_next[n] = coarse.finite() ? interpolate_state(coarse, transfer)
                                       : nan_state(transfer.fine);
    });

    std::vector<WaveState> next;
    next.reserve(N + 1);
    next.push_back(init);
    for (std::size_t n = 1; n <= N; ++n) {
      const WaveState coarse_new = coarse_stage(next[n - 1], schedule, transfer);
      const WaveState coarse_new_fine = coarse_new.finite()
                                            ? interpolate_state(coarse_new, transfer)
                                            : nan_state(transfer.fine);
      next.push_back(coarse_new_fine + fine_next[n] - coarse_next[n]);
    }
    run.iterations.push_back(finalize_iteration(next, &current, run, schedule, options));
    current = std::move(next);
  }
  return run;
}

namespace {

// One corrected coarse evaluation of the sweep: propagate on the coarse
// grid, map to energy components, apply the corrector (or pass through for
// the identity ablation), and reconstruct. The field sum used for the zero
// mode comes from the uncorrected propagated state.
WaveState corrected_coarse_state(const WaveState& coarse_state,
                                 const PhaseCorrector& corrector,
                                 const SpeedField& coarse_speed,
                                 const ThetaOptions& options) {
  EnergyComponents comp =
      to_energy_components(coarse_state, coarse_speed, options.scheme);
  if (!options.omega_identity) comp = apply_corrector(corrector, comp);
  return from_energy_components(comp, coarse_speed);
}

ParaRun theta_engine(const WaveState& init, const CouplingSchedule& schedule,
                     const GridTransfer& transfer, int iterations,
                     const ThetaOptions& options) {
  validate_driver_inputs(init, schedule, transfer, iterations);
  const std::size_t N = schedule.n_couplings;
  const SpeedField& coarse_speed = schedule.coarse_cfg.speed;

  ParaRun run;
  run.reference = reference_or_nan(init, schedule);

  std::vector<WaveState> current = serial_coarse_init(init, schedule, transfer);
  run.iterations.push_back(
      finalize_iteration(current, nullptr, run, schedule, options.driver));

  PhaseCorrector corrector;
  std::vector<WaveState> fine_next(N + 1, WaveState(transfer.fine));
  std::vector<WaveState> coarse_next(N + 1, WaveState(transfer.coarse));

  for (int k = 1; k <= iterations; ++k) {
    parallel_for(1, N + 1, options.driver.workers, [&](std::size_t n) {
      fine_next[n] = fine_stage(current[n - 1], schedule.fine_cfg);
      coarse_next[n] = coarse_stage(current[n - 1], schedule, transfer);
    });

    // enrich the corrector with this pass's snapshot pairs (finite ones only)
    std::vector<WaveState> fine_data, coarse_data;
    fine_data.reserve(N);
    coarse_data.reserve(N);
    for (std::size_t n = 1; n <= N; ++n) {
      if (fine_next[n].finite() && coarse_next[n].finite()) {
        fine_data.push_back(fine_next[n]);
        coarse_data.push_back(coarse_next[n]);
      }
    }
    double residual = kNaN;
    int rank = 0;
    PhaseCorrector applied;
    if (!fine_data.empty()) {
      const auto [F, G] = assemble_snapshots(fine_data, coarse_data, transfer,
                                             coarse_speed, options.scheme);
      if (options.omega_identity) {
        residual = F.norm() > 0.0 ? (F - G).norm() / F.norm() : 0.0;
      } else {
        corrector = update_svd(corrector, F, G, options.tol);
        applied = options.remove_leading > 0
                      ? corrector.drop_leading(options.remove_leading)
                      : corrector;
        residual = relative_residual(applied, F, G);
        rank = static_cast<int>(applied.rank());
      }
    } else if (!options.omega_identity) {
      applied = corrector.drop_leading(options.remove_leading);
      rank = static_cast<int>(applied.rank());
    }

    std::vector<WaveState> next;
    next.reserve(N + 1);
    next.push_back(init);
    for (std::size_t n = 1; n <= N; ++n) {
      if (options.additive_correction) {
        if (n == 1) {
          // the two theta terms cancel exactly at the first coupling
          next.push_back(fine_next[1]);
          continue;
        }
        const WaveState w = coarse_stage(next[n - 1], schedule, transfer);
        if (!w.finite() || !coarse_next[n].finite() || !fine_next[n].finite()) {
          next.push_back(nan_state(transfer.fine));
          continue;
        }
        const WaveState corrected_new =
            corrected_coarse_state(w, applied, coarse_speed, options);
        const WaveState corrected_old =
            corrected_coarse_state(coarse_next[n], applied, coarse_speed, options);
        next.push_back(fine_next[n] +
                       interpolate_state(corrected_new - corrected_old, transfer));
      } else {
        const WaveState w = coarse_stage(next[n - 1], schedule, transfer);
        if (!w.finite()) {
          next.push_back(nan_state(transfer.fine));
          continue;
        }
        next.push_back(interpolate_state(
            corrected_coarse_state(w, applied, coarse_speed, options), transfer));
      }
    }

    IterationRecord rec =
        finalize_iteration(next, &current, run, schedule, options.driver);
    rec.residual = residual;
    rec.rank = rank;
    run.iterations.push_back(std::move(rec));
    current = std::move(next);
  }
  return run;
}

}  // namespace

ParaRun theta_parareal(const WaveState& init, const CouplingSchedule& schedule,
                       const GridTransfer& transfer, int iterations,
                       const ThetaOptions& options) {
  return theta_engine(init, schedule, transfer, iterations, options);
}

ParaRun corrected_coarse_only(const WaveState& init, const CouplingSchedule& schedule,
                              const GridTransfer& transfer, int iterations,
                              ThetaOptions options) {
  options.additive_correction = false;
  return theta_engine(init, schedule, transfer, iterations, options);
}

double speedup_estimate(double n_cpu, double m_s, double m_t, int d, double n_couplings,
                        double iterations) {
  if (n_cpu <= 0 || m_s <= 0 || m_t <= 0 || n_couplings <= 0 || iterations <= 0)
    throw std::invalid_argument("speedup_estimate: all arguments must be positive");
  const double per_interval = std::pow(m_s, d) * m_t;
  return (1.0 / iterations) *
         std::min({n_cpu, per_interval, per_interval / n_couplings});
}

double speedup_full(double n_cpu, double iterations, double dt_fine, double dt_coarse,
                    double dt_com, double n_fine_points, double n_coarse_points,
                    double n_couplings) {
  const double stage = 1.0 / n_cpu;
  const double coarse_ratio =
      (1.0 / n_cpu + 1.0) * (dt_fine * n_coarse_points) / (dt_coarse * n_fine_points);
  const double qr_term = n_coarse_points * n_couplings * dt_fine / (n_fine_points * dt_com);
  return 1.0 / (iterations * (stage + coarse_ratio + qr_term));
}

}  // namespace paratime
