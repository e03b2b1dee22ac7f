#include "paratime/procrustes.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace paratime {

namespace {

void check_tol(double tol) {
  if (!(tol > 0.0) || !(tol < 1.0))
    throw std::invalid_argument("truncation tolerance must lie in (0, 1)");
}

// Deterministic column signs: largest-magnitude entry of each left vector
// made positive, right vector flipped with it.
void fix_signs(Eigen::MatrixXd& left, Eigen::MatrixXd& right) {
  for (Eigen::Index j = 0; j < left.cols(); ++j) {
    Eigen::Index imax = 0;
    left.col(j).cwiseAbs().maxCoeff(&imax);
    if (left(imax, j) < 0.0) {
      left.col(j) = -left.col(j);
      right.col(j) = -right.col(j);
    }
  }
}

// Thin QR with rank truncation: columns whose R diagonal falls below
// drop_tol are discarded (column-pivoted, so small diagonals trail).
void truncated_qr(const Eigen::MatrixXd& A, double drop_tol, Eigen::MatrixXd& Q,
                  Eigen::MatrixXd& R) {
  const Eigen::Index k = std::min(A.rows(), A.cols());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd thinQ = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), k);
  Eigen::MatrixXd thinR =
      qr.matrixR().topRows(k).template triangularView<Eigen::Upper>();
  thinR = thinR * qr.colsPermutation().transpose();
  Eigen::Index keep = 0;
  while (keep < k && std::abs(qr.matrixR()(keep, keep)) > drop_tol) ++keep;
  Q = thinQ.leftCols(keep);
  R = thinR.topRows(keep);
}

PhaseCorrector solve_from_scratch(const SnapshotMatrix& F, const SnapshotMatrix& G,
                                  double tol) {
  const double qr_guard = 1e-14;
  Eigen::MatrixXd QF, RF, QG, RG;
  truncated_qr(F, qr_guard * F.norm(), QF, RF);
  truncated_qr(G, qr_guard * G.norm(), QG, RG);
  if (QF.cols() == 0 || QG.cols() == 0)
    return PhaseCorrector(Eigen::MatrixXd(F.rows(), 0), Eigen::VectorXd(0),
                          Eigen::MatrixXd(F.rows(), 0), tol);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(RF * RG.transpose(),
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  Eigen::Index s = 0;
  while (s < sigma.size() && smax > 0.0 && sigma(s) / smax > tol) ++s;

  Eigen::MatrixXd X = QF * svd.matrixU().leftCols(s);
  Eigen::MatrixXd Y = QG * svd.matrixV().leftCols(s);
  fix_signs(X, Y);
  return PhaseCorrector(std::move(X), sigma.head(s), std::move(Y), tol);
}

}  // namespace

PhaseCorrector::PhaseCorrector(Eigen::MatrixXd left, Eigen::VectorXd singular_values,
                               Eigen::MatrixXd right, double tol)
    : left_(std::move(left)), sv_(std::move(singular_values)), right_(std::move(right)),
      tol_(tol) {
  if (left_.rows() != right_.rows() || left_.cols() != right_.cols() ||
      left_.cols() != sv_.size())
    throw std::invalid_argument("PhaseCorrector: inconsistent factor shapes");
}

Eigen::VectorXd PhaseCorrector::apply(const Eigen::VectorXd& stacked) const {
  if (stacked.size() != rows())
    throw std::invalid_argument("PhaseCorrector: stacked length does not match rows");
  return left_ * (right_.transpose() * stacked);
}

PhaseCorrector PhaseCorrector::drop_leading(Eigen::Index count) const {
  if (count < 0) throw std::invalid_argument("drop_leading: negative count");
  const Eigen::Index keep = std::max<Eigen::Index>(0, rank() - count);
  return PhaseCorrector(left_.rightCols(keep), sv_.tail(keep), right_.rightCols(keep),
                        tol_);
}

void PhaseCorrector::save(std::ostream& os) const {
  os << rows() << " " << rank() << "\n";
  os.precision(17);
  const auto dump = [&os](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
      os << "\n";
    }
  };
  dump(left_);
  for (Eigen::Index i = 0; i < sv_.size(); ++i) os << (i ? " " : "") << sv_(i);
  os << "\n";
  dump(right_);
}

PhaseCorrector PhaseCorrector::load(std::istream& is) {
  Eigen::Index rows = 0, r = 0;
  if (!(is >> rows >> r)) throw std::runtime_error("corrector checkpoint: bad header");
  const auto slurp = [&is, rows, r]() {
    Eigen::MatrixXd m(rows, r);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        if (!(is >> m(i, j)))
          throw std::runtime_error("corrector checkpoint: truncated matrix block");
    return m;
  };
  Eigen::MatrixXd X = slurp();
  Eigen::VectorXd sv(r);
  for (Eigen::Index i = 0; i < r; ++i)
    if (!(is >> sv(i))) throw std::runtime_error("corrector checkpoint: truncated values");
  Eigen::MatrixXd Y = slurp();
  return PhaseCorrector(std::move(X), std::move(sv), std::move(Y), 0.0);
}

Eigen::VectorXd stack_components(const EnergyComponents& comp) {
  const std::size_t n = comp.grid.size();
  const std::size_t d = comp.grad.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>((d + 1) * n));
  Eigen::Index at = 0;
  for (const auto& block : comp.grad) {
    for (double v : block) out(at++) = v;
  }
  for (double v : comp.momentum) out(at++) = v;
  return out;
}

EnergyComponents unstack_components(const Eigen::VectorXd& stacked, const Grid& grid,
                                    double mean_u) {
  const std::size_t n = grid.size();
  const std::size_t d = static_cast<std::size_t>(grid.dim());
  if (stacked.size() != static_cast<Eigen::Index>((d + 1) * n))
    throw std::invalid_argument("unstack_components: length does not match grid");
  EnergyComponents comp{grid, {}, std::vector<double>(n), mean_u};
  Eigen::Index at = 0;
  for (std::size_t a = 0; a < d; ++a) {
    std::vector<double> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = stacked(at++);
    comp.grad.push_back(std::move(block));
  }
  for (std::size_t i = 0; i < n; ++i) comp.momentum[i] = stacked(at++);
  return comp;
}

std::pair<SnapshotMatrix, SnapshotMatrix> assemble_snapshots(
    std::span<const WaveState> fine_states, std::span<const WaveState> coarse_states,
    const GridTransfer& transfer, const SpeedField& coarse_speed,
    GradientScheme scheme) {
  if (fine_states.empty() || fine_states.size() != coarse_states.size())
    throw std::invalid_argument("assemble_snapshots: need equal, nonempty snapshot lists");
  const Eigen::Index rows =
      static_cast<Eigen::Index>((transfer.coarse.dim() + 1) * transfer.coarse.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(fine_states.size());
  SnapshotMatrix F(rows, cols), G(rows, cols);
  for (Eigen::Index n = 0; n < cols; ++n) {
    const WaveState restricted = restrict_state(fine_states[static_cast<std::size_t>(n)], transfer);
    F.col(n) = stack_components(to_energy_components(restricted, coarse_speed, scheme));
    G.col(n) = stack_components(to_energy_components(
        coarse_states[static_cast<std::size_t>(n)], coarse_speed, scheme));
  }
  return {std::move(F), std::move(G)};
}

PhaseCorrector procrustes_solve(const SnapshotMatrix& F, const SnapshotMatrix& G,
                                double tol) {
  check_tol(tol);
  if (F.rows() != G.rows() || F.cols() != G.cols())
    throw std::invalid_argument("procrustes_solve: F and G must have the same shape");
  if (F.cols() > F.rows())
    throw std::invalid_argument("procrustes_solve: more snapshots than rows");
  if (F.cols() == 0) throw std::invalid_argument("procrustes_solve: empty data");
  return solve_from_scratch(F, G, tol);
}

PhaseCorrector update_svd(const PhaseCorrector& corrector, const SnapshotMatrix& F,
                          const SnapshotMatrix& G, double tol) {
  check_tol(tol);
  if (F.rows() != G.rows() || F.cols() != G.cols())
    throw std::invalid_argument("update_svd: F and G must have the same shape");
  if (corrector.empty()) return solve_from_scratch(F, G, tol);
  if (F.rows() != corrector.rows())
    throw std::invalid_argument("update_svd: block rows do not match corrector");

  const Eigen::MatrixXd& U = corrector.left();
  const Eigen::MatrixXd& V = corrector.right();
  const Eigen::Index r = corrector.rank();

  const Eigen::MatrixXd UF = U.transpose() * F;  // r x N
  const Eigen::MatrixXd VG = V.transpose() * G;

  const double qr_guard = 1e-14;
  Eigen::MatrixXd QF, RF, QG, RG;
  truncated_qr(F - U * UF, qr_guard * F.norm(), QF, RF);
  truncated_qr(G - V * VG, qr_guard * G.norm(), QG, RG);
  const Eigen::Index qf = QF.cols(), qg = QG.cols();

  Eigen::MatrixXd left_block(r + qf, F.cols());
  left_block.topRows(r) = UF;
  left_block.bottomRows(qf) = RF;
  Eigen::MatrixXd right_block(r + qg, G.cols());
  right_block.topRows(r) = VG;
  right_block.bottomRows(qg) = RG;

  Eigen::MatrixXd H = left_block * right_block.transpose();
  H.topLeftCorner(r, r) += corrector.singular_values().asDiagonal();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  Eigen::Index keep = 0;
  while (keep < sigma.size() && smax > 0.0 && sigma(keep) / smax > tol) ++keep;

  Eigen::MatrixXd Uext(corrector.rows(), r + qf);
  Uext.leftCols(r) = U;
  Uext.rightCols(qf) = QF;
  Eigen::MatrixXd Vext(corrector.rows(), r + qg);
  Vext.leftCols(r) = V;
  Vext.rightCols(qg) = QG;

  Eigen::MatrixXd Xnew = Uext * svd.matrixU().leftCols(keep);
  Eigen::MatrixXd Ynew = Vext * svd.matrixV().leftCols(keep);
  fix_signs(Xnew, Ynew);
  return PhaseCorrector(std::move(Xnew), sigma.head(keep), std::move(Ynew), tol);
}

EnergyComponents apply_corrector(const PhaseCorrector& corrector,
                                 const EnergyComponents& comp) {
  const Eigen::VectorXd corrected = corrector.apply(stack_components(comp));
  return unstack_components(corrected, comp.grid, comp.mean_u);
}

double relative_residual(const PhaseCorrector& corrector, const SnapshotMatrix& F,
                         const SnapshotMatrix& G) {
  const double fnorm = F.norm();
  if (fnorm == 0.0) return 0.0;
  if (corrector.rank() == 0) return 1.0;  // corrector acts as zero on the data
  const Eigen::MatrixXd corrected =
      corrector.left() * (corrector.right().transpose() * G);
  return (F - corrected).norm() / fnorm;
}

}  // namespace paratime
