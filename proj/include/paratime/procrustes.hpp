#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <utility>

#include "paratime/energy_map.hpp"
#include "paratime/grid.hpp"

namespace paratime {

/// Column n = stacked energy components of snapshot n, blocks in the order
/// [grad axis 0; ...; grad axis d-1; momentum], (d+1)*N_coarse rows.
using SnapshotMatrix = Eigen::MatrixXd;

/// Truncated SVD factors (X, S, Y) of the accumulated correlation matrix
/// M = sum_k F_k G_k^T. The phase corrector acts as v -> X (Y^T v): a
/// partial isometry that is the Procrustes minimizer on range(G) and
/// annihilates its complement.
class PhaseCorrector {
 public:
  PhaseCorrector() = default;  // empty: no accumulated data yet
  PhaseCorrector(Eigen::MatrixXd left, Eigen::VectorXd singular_values,
                 Eigen::MatrixXd right, double tol);

  bool empty() const { return left_.rows() == 0; }
  Eigen::Index rows() const { return left_.rows(); }
  Eigen::Index rank() const { return sv_.size(); }
  const Eigen::MatrixXd& left() const { return left_; }
  const Eigen::MatrixXd& right() const { return right_; }
  const Eigen::VectorXd& singular_values() const { return sv_; }
  double tol() const { return tol_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& stacked) const;

  /// Copy with the first count singular triplets deleted (ablation studies).
  PhaseCorrector drop_leading(Eigen::Index count) const;

  /// Text checkpoint: "rows r" header then X, S, Y blocks.
  void save(std::ostream& os) const;
  static PhaseCorrector load(std::istream& is);

 private:
  Eigen::MatrixXd left_;   // rows x r, orthonormal columns
  Eigen::VectorXd sv_;     // nonincreasing, > tol * max
  Eigen::MatrixXd right_;  // rows x r, orthonormal columns
  double tol_ = 0.0;
};

Eigen::VectorXd stack_components(const EnergyComponents& comp);
EnergyComponents unstack_components(const Eigen::VectorXd& stacked, const Grid& grid,
                                    double mean_u);

/// F column n = components of the restricted fine snapshot n, G column n =
/// components of the coarse snapshot n; both on the coarse grid with the
/// coarse speed.
std::pair<SnapshotMatrix, SnapshotMatrix> assemble_snapshots(
    std::span<const WaveState> fine_states, std::span<const WaveState> coarse_states,
    const GridTransfer& transfer, const SpeedField& coarse_speed,
    GradientScheme scheme);

/// Orthogonal Procrustes minimizer of ||F - Omega G||_F via reduced QR of
/// F, G and the SVD of R_F R_G^T, truncated at sigma_i/sigma_max > tol.
PhaseCorrector procrustes_solve(const SnapshotMatrix& F, const SnapshotMatrix& G,
                                double tol);

/// Rank-one-block SVD update: returns truncated factors of
/// old.left diag(old.sv) old.right^T + F G^T.
PhaseCorrector update_svd(const PhaseCorrector& corrector, const SnapshotMatrix& F,
                          const SnapshotMatrix& G, double tol);

/// Components -> corrected components: stacked vector through X Y^T, the
/// field sum passed through unchanged.
EnergyComponents apply_corrector(const PhaseCorrector& corrector,
                                 const EnergyComponents& comp);

/// ||F - X Y^T G||_F / ||F||_F.
double relative_residual(const PhaseCorrector& corrector, const SnapshotMatrix& F,
                         const SnapshotMatrix& G);

}  // namespace paratime
