#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "paratime/energy_map.hpp"
#include "paratime/grid.hpp"
#include "paratime/procrustes.hpp"
#include "paratime/propagator.hpp"

namespace paratime {

/// Time axis shared by both propagators: n_couplings intervals of dt_com
/// covering [0, T], each resolved by an integer number of coarse and fine
/// steps.
struct CouplingSchedule {
  double T;
  double dt_com;
  std::size_t n_couplings;
  PropagatorConfig fine_cfg;
  PropagatorConfig coarse_cfg;

  CouplingSchedule(double T_in, double dt_com_in, std::size_t n, PropagatorConfig fine,
                   PropagatorConfig coarse);
};

/// One entry of the iteration history. Index 0 is the serial-coarse
/// initialization; index k is the iterate after k correction passes.
struct IterationRecord {
  std::vector<WaveState> states;      // fine-grid states 0..N (empty if not kept)
  std::vector<double> energy_err;     // vs the serial fine reference, per coupling
  std::vector<double> l2_err;
  double residual = std::numeric_limits<double>::quiet_NaN();
  int rank = 0;
  bool diverged = false;
};

struct ParaRun {
  std::vector<WaveState> reference;        // serial fine, states 0..N
  std::vector<IterationRecord> iterations; // size K+1, [0] = initialization
};

struct DriverOptions {
  GradientScheme metric_scheme = GradientScheme::fd2;  // error seminorm only
  int workers = 0;                                     // 0 = hardware threads
  bool keep_states = true;
};

struct ThetaOptions {
  GradientScheme scheme = GradientScheme::fd2;  // data-matrix gradient
  double tol = 1e-15;
  bool omega_identity = false;      // bypass the Procrustes corrector
  bool additive_correction = true;  // false: propagate with theta*C only
  int remove_leading = 0;           // singular triplets dropped before each sweep
  DriverOptions driver;
};

/// N+1 states of the serial fine propagation.
std::vector<WaveState> serial_fine(const WaveState& init, const CouplingSchedule& schedule);

/// Classical parareal with the coarse stage I*C*R; iterate 0 is the serial
/// coarse run.
ParaRun plain_parareal(const WaveState& init, const CouplingSchedule& schedule,
                       const GridTransfer& transfer, int iterations,
                       const DriverOptions& options = {});

/// Data-driven variant: every pass gathers fine/coarse snapshot pairs,
/// enriches the corrector via the incremental SVD, and sweeps with the
/// phase-corrected coarse stage plus the parareal additive correction.
ParaRun theta_parareal(const WaveState& init, const CouplingSchedule& schedule,
                       const GridTransfer& transfer, int iterations,
                       const ThetaOptions& options);

/// Ablation: the additive fine-coarse correction is omitted and the
/// solution is advanced by the corrected coarse propagator alone.
ParaRun corrected_coarse_only(const WaveState& init, const CouplingSchedule& schedule,
                              const GridTransfer& transfer, int iterations,
                              ThetaOptions options);

/// (1/K) min(n_cpu, m_s^d m_t, m_s^d m_t / N).
double speedup_estimate(double n_cpu, double m_s, double m_t, int d, double n_couplings,
                        double iterations);

/// Full wall-clock speedup expression over the serial fine run.
double speedup_full(double n_cpu, double iterations, double dt_fine, double dt_coarse,
                    double dt_com, double n_fine_points, double n_coarse_points,
                    double n_couplings);

}  // namespace paratime
