#include "hvdc/control_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "hvdc/errors.hpp"

namespace hvdc {
namespace {

using Eigen::EigenSolver;
using Eigen::Index;

constexpr double kImaginaryAxisTol = 1e-8;
constexpr double kIllConditioned = 1e12;
constexpr int kMaxRefinementSteps = 30;
constexpr double kRefinementTolerance = 1e-15;

void require_square(const MatrixXd& A, const char* name) {
  if (A.rows() != A.cols()) {
    throw DimensionMismatch(fmt::format("{} must be square, got {}x{}", name,
                                        A.rows(), A.cols()));
  }
}

void require_finite(const MatrixXd& A, const char* name) {
  if (!A.allFinite()) throw NonFinite(fmt::format("{} has non-finite entries", name));
}

bool is_symmetric(const MatrixXd& A, double tol = 1e-10) {
  return (A - A.transpose()).norm() <= tol * std::max(1.0, A.norm());
}

MatrixXd symmetrize(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

/// Symmetric square root of a positive semidefinite matrix; throws if it
/// has a clearly negative eigenvalue.
MatrixXd psd_sqrt(const MatrixXd& S, const char* name) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(S));
  const VectorXd& d = es.eigenvalues();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  if (d.size() > 0 && d.minCoeff() < -1e-10 * scale) {
    throw InvalidParameter(fmt::format(
        "{} must be positive semidefinite (min eigenvalue {})", name, d.minCoeff()));
  }
  const VectorXd r = d.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
}

/// PBH test over the eigenvalues of A with real part >= -margin.
bool pbh_full_rank(const MatrixXd& A, const MatrixXd& B) {
  const Index n = A.rows();
  if (n == 0) return true;
  EigenSolver<MatrixXd> es(A, false);
  const VectorXcd lambda = es.eigenvalues();
  const double scale = std::max(1.0, std::max(A.norm(), B.norm()));
  MatrixXcd M(n, n + B.cols());
  for (Index k = 0; k < n; ++k) {
    const std::complex<double> l = lambda(k);
    if (l.real() < -1e-9 * std::max(1.0, std::abs(l))) continue;
    M.leftCols(n) = A.cast<std::complex<double>>();
    M.leftCols(n).diagonal().array() -= l;
    M.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<MatrixXcd> svd(M);
    if (svd.singularValues()(n - 1) < 1e-10 * scale) return false;
  }
  return true;
}

/// Swaps the adjacent diagonal blocks of sizes p and q starting at row j of
/// the quasi-triangular T, accumulating the rotation into U.
void swap_blocks(MatrixXd& T, MatrixXd& U, Index j, Index p, Index q) {
  const MatrixXd A11 = T.block(j, j, p, p);
  const MatrixXd A22 = T.block(j + p, j + p, q, q);
  const MatrixXd A12 = T.block(j, j + p, p, q);
  // A11 X - X A22 = A12 in column-major vec form.
  MatrixXd K = MatrixXd::Zero(p * q, p * q);
  for (Index c = 0; c < q; ++c) {
    K.block(c * p, c * p, p, p) += A11;
    for (Index r = 0; r < q; ++r) {
      K.block(c * p, r * p, p, p).diagonal().array() -= A22(r, c);
    }
  }
  const VectorXd vecA12 = Eigen::Map<const VectorXd>(A12.data(), p * q);
  const VectorXd vecX = K.fullPivLu().solve(vecA12);
  const MatrixXd X = Eigen::Map<const MatrixXd>(vecX.data(), p, q);

  MatrixXd basis(p + q, q);
  basis << -X, MatrixXd::Identity(q, q);
  Eigen::HouseholderQR<MatrixXd> qr(basis);
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(p + q, p + q);

  T.middleRows(j, p + q) = Q.transpose() * T.middleRows(j, p + q);
  T.middleCols(j, p + q) = T.middleCols(j, p + q) * Q;
  U.middleCols(j, p + q) = U.middleCols(j, p + q) * Q;
  T.block(j + q, j, p, q).setZero();
}

double block_real_part(const MatrixXd& T, Index j, Index size) {
  return size == 1 ? T(j, j) : 0.5 * (T(j, j) + T(j + 1, j + 1));
}

double block_magnitude(const MatrixXd& T, Index j, Index size) {
  if (size == 1) return std::abs(T(j, j));
  return std::sqrt(std::abs(T.block(j, j, 2, 2).determinant()));
}

}  // namespace

bool is_stabilizable(const MatrixXd& A, const MatrixXd& B) {
  require_square(A, "A");
  if (B.rows() != A.rows()) throw DimensionMismatch("B rows must match A");
  return pbh_full_rank(A, B);
}

bool is_detectable(const MatrixXd& A, const MatrixXd& C) {
  require_square(A, "A");
  if (C.cols() != A.cols()) throw DimensionMismatch("C columns must match A");
  return pbh_full_rank(A.transpose(), C.transpose());
}

MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q) {
  require_square(A, "A");
  require_square(Q, "Q");
  if (Q.rows() != A.rows()) throw DimensionMismatch("Q must match A");
  const Index n = A.rows();
  if (n == 0) return MatrixXd(0, 0);

  Eigen::ComplexSchur<MatrixXd> cs(A);
  const MatrixXcd& T = cs.matrixT();
  const MatrixXcd& U = cs.matrixU();
  // T^H Y + Y T = F with F = -U^H Q U, solved one column at a time.
  const MatrixXcd F = -(U.adjoint() * Q.cast<std::complex<double>>() * U);
  const MatrixXcd TH = T.adjoint();
  MatrixXcd Y = MatrixXcd::Zero(n, n);
  const double scale = std::max(1.0, T.norm());
  for (Index k = 0; k < n; ++k) {
    VectorXcd rhs = F.col(k);
    if (k > 0) rhs -= Y.leftCols(k) * T.col(k).head(k);
    MatrixXcd M = TH;
    M.diagonal().array() += T(k, k);
    if (M.diagonal().cwiseAbs().minCoeff() < 1e-14 * scale) {
      throw DegenerateModel("Lyapunov equation is singular");
    }
    Y.col(k) = M.triangularView<Eigen::Lower>().solve(rhs);
  }
  const MatrixXd X = (U * Y * U.adjoint()).real();
  return symmetrize(X);
}

OrderedSchur ordered_real_schur(const MatrixXd& H) {
  require_square(H, "H");
  Eigen::RealSchur<MatrixXd> rs(H);
  if (rs.info() != Eigen::Success) throw NoStableSubspace("real Schur decomposition failed");
  OrderedSchur out{rs.matrixT(), rs.matrixU(), 0};
  MatrixXd& T = out.T;
  const Index n = T.rows();

  std::vector<Index> sizes;
  for (Index i = 0; i < n;) {
    const Index s = (i + 1 < n && T(i + 1, i) != 0.0) ? 2 : 1;
    sizes.push_back(s);
    i += s;
  }
  // Bubble each stable block up past the unstable blocks above it.
  std::vector<bool> stable;
  {
    Index j = 0;
    for (Index s : sizes) {
      stable.push_back(block_real_part(T, j, s) < 0.0);
      j += s;
    }
  }
  std::size_t placed = 0;  // leading blocks already stable
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (!stable[b]) continue;
    for (std::size_t k = b; k > placed; --k) {
      Index j = 0;
      for (std::size_t t = 0; t + 1 < k; ++t) j += sizes[t];
      swap_blocks(T, out.U, j, sizes[k - 1], sizes[k]);
      std::swap(sizes[k - 1], sizes[k]);
      std::swap(stable[k - 1], stable[k]);
    }
    ++placed;
  }
  for (std::size_t b = 0; b < placed; ++b) out.num_selected += static_cast<int>(sizes[b]);
  return out;
}

double care_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                     const MatrixXd& R, const MatrixXd& P,
                     const std::optional<MatrixXd>& N) {
  const MatrixXd Rinv = R.inverse();
  MatrixXd PBN = P * B;
  if (N) PBN += *N;
  const MatrixXd res =
      A.transpose() * P + P * A + Q - PBN * Rinv * PBN.transpose();
  const double G = (B * Rinv * B.transpose()).norm();
  const double denom = std::max({Q.norm(), P.norm() * P.norm() * G, 1e-300});
  return res.norm() / denom;
}

CareSolution solve_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                        const MatrixXd& R, const std::optional<MatrixXd>& N) {
  require_square(A, "A");
  require_square(Q, "Q");
  require_square(R, "R");
  const Index n = A.rows(), m = B.cols();
  if (B.rows() != n || Q.rows() != n || R.rows() != m) {
    throw DimensionMismatch("CARE operands have inconsistent sizes");
  }
  if (N && (N->rows() != n || N->cols() != m)) {
    throw DimensionMismatch("cross weight N must be n x m");
  }
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(Q, "Q");
  require_finite(R, "R");
  if (!is_symmetric(Q)) throw InvalidParameter("Q must be symmetric");
  if (!is_symmetric(R)) throw InvalidParameter("R must be symmetric");
  Eigen::LLT<MatrixXd> Rllt(symmetrize(R));
  if (Rllt.info() != Eigen::Success) throw InvalidParameter("R must be positive definite");

  // Remove the cross term: A0 = A - B R^-1 N^T, Q0 = Q - N R^-1 N^T.
  MatrixXd A0 = A, Q0 = symmetrize(Q);
  if (N) {
    A0 -= B * Rllt.solve(N->transpose());
    Q0 = symmetrize(Q0 - *N * Rllt.solve(N->transpose()));
  }
  const MatrixXd Qhalf = psd_sqrt(Q0, "Q - N R^-1 N^T");
  if (!is_stabilizable(A0, B)) throw NotStabilizable("(A, B) is not stabilizable");
  if (!is_detectable(A0, Qhalf)) throw NotDetectable("(A, Q^1/2) is not detectable");

  const MatrixXd G = symmetrize(B * Rllt.solve(B.transpose()));
  MatrixXd H(2 * n, 2 * n);
  H << A0, -G, -Q0, -A0.transpose();

  OrderedSchur os = ordered_real_schur(H);
  {
    const MatrixXd& T = os.T;
    for (Index i = 0; i < 2 * n;) {
      const Index s = (i + 1 < 2 * n && T(i + 1, i) != 0.0) ? 2 : 1;
      const double re = block_real_part(T, i, s);
      if (std::abs(re) <= kImaginaryAxisTol * std::max(1.0, block_magnitude(T, i, s))) {
        throw NoStableSubspace("Hamiltonian has eigenvalues on the imaginary axis");
      }
      i += s;
    }
  }
  if (os.num_selected != n) {
    throw NoStableSubspace(fmt::format("stable subspace has dimension {}, expected {}",
                                       os.num_selected, n));
  }
  const MatrixXd U11 = os.U.topLeftCorner(n, n);
  const MatrixXd U21 = os.U.bottomLeftCorner(n, n);
  Eigen::JacobiSVD<MatrixXd> svd(U11);
  const VectorXd& sv = svd.singularValues();
  CareSolution sol;
  sol.subspace_condition = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1)
                                           : std::numeric_limits<double>::infinity();
  sol.ill_conditioned = !(sol.subspace_condition <= kIllConditioned);
  MatrixXd P = symmetrize(U11.transpose().fullPivLu().solve(U21.transpose()).transpose());

  // Newton-Kleinman refinement: P <- lyap(A0 - B K, Q0 + K' R K) with
  // K = R^-1 B' P. This form avoids the cancellation in A'P + PA - PGP
  // when P is large. Stops once the update stagnates.
  double last_change = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxRefinementSteps; ++it) {
    const MatrixXd K = Rllt.solve(B.transpose() * P);
    const MatrixXd Ak = A0 - B * K;
    if (!(spectral_abscissa(Ak) < 0.0)) break;
    MatrixXd Pn;
    try {
      Pn = symmetrize(solve_lyapunov(Ak, symmetrize(Q0 + K.transpose() * R * K)));
    } catch (const DegenerateModel&) {
      break;
    }
    const double change = (Pn - P).norm() / std::max(Pn.norm(), 1e-300);
    if (!(change < last_change) && it > 0) break;
    P = Pn;
    ++sol.refinement_steps;
    last_change = change;
    if (change <= kRefinementTolerance) break;
  }
  sol.P = P;
  sol.residual = care_residual(A, B, Q, R, P, N);
  return sol;
}

CareSolution solve_care_newton(const MatrixXd& A, const MatrixXd& B,
                               const MatrixXd& Q, const MatrixXd& R,
                               const MatrixXd& K0, int max_iterations,
                               double tolerance) {
  require_square(A, "A");
  if (K0.rows() != B.cols() || K0.cols() != A.rows()) {
    throw DimensionMismatch("initial gain must be m x n");
  }
  if (spectral_abscissa(A - B * K0) >= 0.0) {
    throw NotStabilizing("initial gain is not stabilizing");
  }
  const Eigen::LLT<MatrixXd> Rllt(R);
  MatrixXd K = K0, P;
  CareSolution sol;
  for (int it = 0; it < max_iterations; ++it) {
    const MatrixXd Ak = A - B * K;
    const MatrixXd Pn = solve_lyapunov(Ak, Q + K.transpose() * R * K);
    K = Rllt.solve(B.transpose() * Pn);
    const bool done = P.size() > 0 &&
                      (Pn - P).norm() <= tolerance * std::max(1.0, Pn.norm());
    P = Pn;
    ++sol.refinement_steps;
    if (done) break;
  }
  sol.P = P;
  sol.residual = care_residual(A, B, Q, R, P);
  return sol;
}

MatrixXd bass_stabilizing_gain(const MatrixXd& A, const MatrixXd& B) {
  require_square(A, "A");
  const Index n = A.rows();
  // -(A + beta I) must be stable; the closed loop then has Re = -beta.
  const double beta =
      std::max(0.0, -EigenSolver<MatrixXd>(A, false).eigenvalues().real().minCoeff()) + 1.0;
  const MatrixXd Ab = -(A + beta * MatrixXd::Identity(n, n));
  // Ab Z + Z Ab^T + 2 B B^T = 0.
  MatrixXd Z = solve_lyapunov(Ab.transpose(), 2.0 * B * B.transpose());
  Z = 0.5 * (Z + Z.transpose());
  Eigen::LDLT<MatrixXd> ldlt(Z);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    throw NotStabilizable("(A, B) is not controllable");
  }
  const MatrixXd K = ldlt.solve(B).transpose();
  if (!(spectral_abscissa(A - B * K) < 0.0)) {
    throw NotStabilizable("Bass gain is not stabilizing; the Gramian is too ill-conditioned");
  }
  return K;
}

MatrixXd lqr_gain(const MatrixXd& P, const MatrixXd& B, const MatrixXd& R,
                  const std::optional<MatrixXd>& N) {
  MatrixXd rhs = B.transpose() * P;
  if (N) rhs += N->transpose();
  return Eigen::LLT<MatrixXd>(R).solve(rhs);
}

MatrixXd lqr_cost_matrix(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                         const MatrixXd& R, const MatrixXd& K) {
  const MatrixXd Ak = A - B * K;
  if (spectral_abscissa(Ak) >= 0.0) throw NotStabilizing("gain is not stabilizing");
  return solve_lyapunov(Ak, Q + K.transpose() * R * K);
}

double spectral_abscissa(const MatrixXd& A) {
  require_square(A, "A");
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  require_finite(A, "A");
  EigenSolver<MatrixXd> es(A, false);
  return es.eigenvalues().real().maxCoeff();
}

const std::vector<std::string>& augmented_weight_labels() {
  static const std::vector<std::string> labels = {
      "int_fi", "int_fr", "int_Vdcr", "int_Vdrop", "fi",  "Pgi", "Pti", "Pci",
      "Idci",   "fr",     "Pgr",      "Ptr",       "Pcr", "Vdcr", "Vdrop"};
  return labels;
}

LqgWeights LqgWeights::defaults() {
  LqgWeights w;
  w.Q.resize(15);
  w.Q << 1000, 1000, 1e5, 1e5, 10, 0, 0, 0, 0, 10, 0, 0, 0, 1, 1;
  w.R_w = VectorXd::Ones(4);
  w.W = VectorXd::Constant(6, 1e-2);
  w.V_n = VectorXd::Constant(8, 1e-6);
  return w;
}

void LqgWeights::validate() const {
  if (Q.size() != 15) throw DimensionMismatch("Q needs 15 weights");
  if (R_w.size() != 4) throw DimensionMismatch("R_w needs 4 weights");
  if (W.size() != 6) throw DimensionMismatch("W needs 6 weights");
  if (V_n.size() != 8) throw DimensionMismatch("V_n needs 8 weights");
  if (!Q.allFinite() || (Q.array() < 0.0).any()) {
    throw InvalidParameter("Q weights must be finite and nonnegative");
  }
  if (!R_w.allFinite() || (R_w.array() <= 0.0).any()) {
    throw InvalidParameter("R_w weights must be positive");
  }
  if (!W.allFinite() || (W.array() < 0.0).any()) {
    throw InvalidParameter("W entries must be nonnegative");
  }
  if (!V_n.allFinite() || (V_n.array() <= 0.0).any()) {
    throw InvalidParameter("V_n entries must be positive");
  }
}

CostMatrices cost_matrices(const AugmentedModel& aug, const LqgWeights& w) {
  w.validate();
  const auto& sys = aug.sys;
  const Index n = sys.num_states();
  constexpr int m = AugmentedModel::kNumReferences;
  CostMatrices c{MatrixXd::Zero(n, n), MatrixXd::Zero(n, m), w.R_w.asDiagonal()};
  const auto& labels = augmented_weight_labels();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double q = w.Q(static_cast<Index>(k));
    if (q == 0.0) continue;
    if (sys.has_state(labels[k])) {
      const int i = sys.state_index(labels[k]);
      c.Q(i, i) += q;
    } else if (sys.has_output(labels[k])) {
      const int j = sys.output_index(labels[k]);
      const Eigen::RowVectorXd cr = sys.C.row(j);
      const Eigen::RowVectorXd dr = sys.D.row(j).head(m);
      c.Q += q * cr.transpose() * cr;
      c.N += q * cr.transpose() * dr;
      c.R += q * dr.transpose() * dr;
    } else {
      throw InvalidParameter(fmt::format("no state or output named {}", labels[k]));
    }
  }
  return c;
}

MatrixXd kalman_gain(const MatrixXd& A, const MatrixXd& C, const MatrixXd& W_eff,
                     const MatrixXd& V_n, CareSolution* solution) {
  CareSolution s;
  try {
    s = solve_care(A.transpose(), C.transpose(), W_eff, V_n);
  } catch (const NotStabilizable&) {
    throw NotDetectable("(A, C) is not detectable");
  } catch (const NotDetectable&) {
    throw NotStabilizable("(A, W^1/2) is not stabilizable");
  }
  const MatrixXd L = Eigen::LLT<MatrixXd>(V_n).solve(C * s.P).transpose();
  if (solution) *solution = std::move(s);
  return L;
}

LqgDesign design_lqg(const AugmentedModel& aug, const LqgWeights& w) {
  LqgDesign d;
  d.cost = cost_matrices(aug, w);
  const MatrixXd& A = aug.A();
  const MatrixXd Br = aug.Br();
  const MatrixXd Cm = aug.Cm();
  const MatrixXd Dmr = aug.Dmr();
  const bool cross = d.cost.N.norm() > 0.0;
  d.control = solve_care(A, Br, d.cost.Q, d.cost.R,
                         cross ? std::optional<MatrixXd>(d.cost.N) : std::nullopt);
  d.K = lqr_gain(d.control.P, Br, d.cost.R,
                 cross ? std::optional<MatrixXd>(d.cost.N) : std::nullopt);
  if (spectral_abscissa(A - Br * d.K) >= 0.0) {
    throw NotStabilizing("state-feedback loop is not Hurwitz");
  }
  const MatrixXd& G = aug.sys.B;
  const MatrixXd W_eff = G * w.W.asDiagonal() * G.transpose();
  d.L = kalman_gain(A, Cm, W_eff, MatrixXd(w.V_n.asDiagonal()), &d.filter);
  if (spectral_abscissa(A - d.L * Cm) >= 0.0) {
    throw NotStabilizing("estimator is not Hurwitz");
  }

  LinearController& c = d.controller;
  c.Ac = A - Br * d.K - d.L * (Cm - Dmr * d.K);
  c.Bc = d.L;
  c.Cc = -d.K;
  c.Dc = MatrixXd::Zero(Br.cols(), Cm.rows());
  for (const auto& s : aug.sys.state_labels) c.state_labels.push_back("est_" + s);
  c.input_labels.assign(aug.sys.output_labels.begin(),
                        aug.sys.output_labels.begin() + AugmentedModel::kNumMeasured);
  return d;
}

StateSpaceModel closed_loop(const AugmentedModel& aug, const MatrixXd& K) {
  const MatrixXd Acl = aug.A() - aug.Br() * K;
  if (spectral_abscissa(Acl) >= 0.0) throw NotStabilizing("gain is not stabilizing");
  const int nm = AugmentedModel::kNumMeasured;
  std::vector<std::string> w(aug.sys.input_labels.end() - AugmentedModel::kNumDisturbances,
                             aug.sys.input_labels.end());
  std::vector<std::string> y(aug.sys.output_labels.begin(),
                             aug.sys.output_labels.begin() + nm);
  return make_model(Acl, aug.Bw(), aug.Cm() - aug.Dmr() * K, aug.Dmw(),
                    aug.sys.state_labels, w, y);
}

std::vector<PiLoop> build_pi_controller(int case_id, const PiGains& g,
                                        ConverterPiSignal signal) {
  if (g.gen_kp < 0 || g.gen_ki < 0 || g.hvdc_kp < 0 || g.hvdc_ki < 0) {
    throw InvalidParameter("PI gains must be nonnegative");
  }
  // Reference channels: 0 Pgi_ref, 1 Pgr_ref, 2 Idci_ref, 3 Vdcr_ref.
  std::vector<PiLoop> loops = {
      {"fi", 0, g.gen_kp, g.gen_ki, -1.0},
      {"fr", 1, g.gen_kp, g.gen_ki, -1.0},
  };
  if (case_id == 2) {
    if (signal == ConverterPiSignal::kConverterQuantities) {
      loops.push_back({"Idci", 2, g.hvdc_kp, g.hvdc_ki, -1.0});
      loops.push_back({"Vdcr", 3, g.hvdc_kp, g.hvdc_ki, -1.0});
    } else {
      loops.push_back({"fi", 2, g.hvdc_kp, g.hvdc_ki, -1.0});
      loops.push_back({"fr", 3, g.hvdc_kp, g.hvdc_ki, 1.0});
    }
  } else if (case_id == 3) {
    loops.push_back({"fi", 2, g.hvdc_kp, g.hvdc_ki, -1.0});
  } else {
    throw UnknownCase(fmt::format("no PI controller for case {}", case_id));
  }
  return loops;
}

LinearController realize_pi(const std::vector<PiLoop>& loops) {
  LinearController c;
  std::map<std::string, int> input_of;
  for (const auto& l : loops) {
    if (!input_of.count(l.signal)) {
      input_of[l.signal] = static_cast<int>(c.input_labels.size());
      c.input_labels.push_back(l.signal);
    }
  }
  const int ny = static_cast<int>(c.input_labels.size());
  std::vector<int> state_of(ny, -1);
  int nx = 0;
  for (const auto& l : loops) {
    const int j = input_of[l.signal];
    if (l.ki != 0.0 && state_of[j] < 0) {
      state_of[j] = nx++;
      c.state_labels.push_back("pi_int_" + l.signal);
    }
  }
  constexpr int nr = PlantModel::kNumReferences;
  c.Ac = MatrixXd::Zero(nx, nx);
  c.Bc = MatrixXd::Zero(nx, ny);
  c.Cc = MatrixXd::Zero(nr, nx);
  c.Dc = MatrixXd::Zero(nr, ny);
  for (int j = 0; j < ny; ++j) {
    if (state_of[j] >= 0) c.Bc(state_of[j], j) = 1.0;
  }
  for (const auto& l : loops) {
    if (l.channel < 0 || l.channel >= nr) throw InvalidParameter("PI channel out of range");
    const int j = input_of[l.signal];
    c.Dc(l.channel, j) += l.sign * l.kp;
    if (state_of[j] >= 0) c.Cc(l.channel, state_of[j]) += l.sign * l.ki;
  }
  return c;
}

StateSpaceModel close_loop(const StateSpaceModel& plant, int nr,
                           const LinearController& ctrl, bool noise_inputs) {
  const int n = plant.num_states(), q = plant.num_outputs();
  const int nw = plant.num_inputs() - nr;
  const int nc = static_cast<int>(ctrl.Ac.rows());
  const int ny = static_cast<int>(ctrl.input_labels.size());
  if (nw < 0 || ctrl.Cc.rows() != nr || ctrl.Dc.rows() != nr || ctrl.Dc.cols() != ny ||
      ctrl.Bc.rows() != nc || ctrl.Bc.cols() != ny || ctrl.Cc.cols() != nc ||
      ctrl.Ac.cols() != nc) {
    throw DimensionMismatch("controller does not match the plant");
  }
  MatrixXd S = MatrixXd::Zero(ny, q);
  for (int j = 0; j < ny; ++j) S(j, plant.output_index(ctrl.input_labels[j])) = 1.0;
  const MatrixXd Dr = plant.D.leftCols(nr), Dw = plant.D.rightCols(nw);
  const MatrixXd Br = plant.B.leftCols(nr), Bw = plant.B.rightCols(nw);
  const MatrixXd Cy = S * plant.C, Dyr = S * Dr, Dyw = S * Dw;

  // Exogenous inputs u = [w, d, n]: d adds to the references, n to the
  // measurements. Controller output r_c = M (Cc xc + Dc y_m) after
  // resolving the loop through the plant feedthrough.
  const int nu = nw + (noise_inputs ? nr + ny : 0);
  MatrixXd Ew = MatrixXd::Zero(nw, nu), Ed = MatrixXd::Zero(nr, nu),
           En = MatrixXd::Zero(ny, nu);
  Ew.leftCols(nw).setIdentity();
  if (noise_inputs) {
    Ed.middleCols(nw, nr).setIdentity();
    En.rightCols(ny).setIdentity();
  }
  Eigen::FullPivLU<MatrixXd> lu(MatrixXd::Identity(nr, nr) - ctrl.Dc * Dyr);
  if (!lu.isInvertible()) throw DegenerateModel("controller loop is ill-posed");
  const MatrixXd M = lu.inverse();
  MatrixXd Rz(nr, n + nc);
  Rz << M * ctrl.Dc * Cy, M * ctrl.Cc;
  const MatrixXd Ru = M * ctrl.Dc * (Dyr * Ed + Dyw * Ew + En);
  // Applied references r_a = r_c + d.
  const MatrixXd& Raz = Rz;
  const MatrixXd Rau = Ru + Ed;
  // Measurements y_m = Cy x + Dyr r_a + Dyw w + n.
  MatrixXd Ymz = Dyr * Raz;
  Ymz.leftCols(n) += Cy;
  const MatrixXd Ymu = Dyr * Rau + Dyw * Ew + En;

  MatrixXd A = MatrixXd::Zero(n + nc, n + nc);
  A.topRows(n) = Br * Raz;
  A.topLeftCorner(n, n) += plant.A;
  A.bottomRows(nc) = ctrl.Bc * Ymz;
  A.bottomRightCorner(nc, nc) += ctrl.Ac;
  MatrixXd B(n + nc, nu);
  B.topRows(n) = Br * Rau + Bw * Ew;
  B.bottomRows(nc) = ctrl.Bc * Ymu;

  MatrixXd C(q + nr, n + nc), D(q + nr, nu);
  C.topRows(q) = Dr * Raz;
  C.topLeftCorner(q, n) += plant.C;
  C.bottomRows(nr) = Raz;
  D.topRows(q) = Dr * Rau + Dw * Ew;
  D.bottomRows(nr) = Rau;

  std::vector<std::string> xs = plant.state_labels;
  xs.insert(xs.end(), ctrl.state_labels.begin(), ctrl.state_labels.end());
  std::vector<std::string> us(plant.input_labels.begin() + nr, plant.input_labels.end());
  if (noise_inputs) {
    for (int k = 0; k < nr; ++k) us.push_back("d_" + plant.input_labels[k]);
    for (const auto& l : ctrl.input_labels) us.push_back("n_" + l);
  }
  std::vector<std::string> ys = plant.output_labels;
  ys.insert(ys.end(), plant.input_labels.begin(), plant.input_labels.begin() + nr);
  return make_model(A, B, C, D, xs, us, ys);
}

}  // namespace hvdc
