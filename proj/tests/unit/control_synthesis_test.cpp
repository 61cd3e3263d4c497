#include "hvdc/control_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "hvdc/errors.hpp"
#include "hvdc/simulation.hpp"
#include "hvdc/system_config.hpp"
#include "test_support.hpp"

namespace hvdc {
namespace {

using Eigen::EigenSolver;

AugmentedModel default_augmented() { return augment(build_plant(SystemConfig{})); }

std::vector<std::complex<double>> spectrum(const MatrixXd& A) {
  const VectorXcd ev = EigenSolver<MatrixXd>(A, false).eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

// Largest distance from an eigenvalue of `a` to its greedy partner in `b`.
double spectrum_mismatch(std::vector<std::complex<double>> a,
                         std::vector<std::complex<double>> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const auto& z : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](const auto& p, const auto& q) {
      return std::abs(p - z) < std::abs(q - z);
    });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

TEST(Care, ScalarIntegrator) {
  const MatrixXd one = MatrixXd::Identity(1, 1);
  const CareSolution s = solve_care(MatrixXd::Zero(1, 1), one, one, one);
  EXPECT_NEAR(s.P(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(lqr_gain(s.P, one, one)(0, 0), 1.0, 1e-14);
}

TEST(Care, StableSystemWithoutStateCost) {
  const MatrixXd one = MatrixXd::Identity(1, 1);
  const CareSolution s = solve_care(-one, one, MatrixXd::Zero(1, 1), one);
  EXPECT_NEAR(s.P(0, 0), 0.0, 1e-14);
}

TEST(Care, DoubleIntegratorClosedForm) {
  MatrixXd A(2, 2);
  A << 0, 1, 0, 0;
  const MatrixXd B = Eigen::Vector2d(0, 1);
  const CareSolution s =
      solve_care(A, B, MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1));
  const double r3 = std::sqrt(3.0);
  MatrixXd expected(2, 2);
  expected << r3, 1, 1, r3;
  EXPECT_LT((s.P - expected).norm(), 1e-12);
  EXPECT_LE(s.residual, 1e-12);
}

TEST(Care, RandomSystemsAgreeWithNewtonOnlySolve) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> states(1, 20), inputs(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = trial < 30 ? states(rng) : 8;
    const int m = std::min(inputs(rng), n);
    const testing::RandomSystem sys = testing::random_system(rng, n, m);
    SCOPED_TRACE(::testing::Message() << "trial " << trial << " n=" << n << " m=" << m);
    const CareSolution s = solve_care(sys.A, sys.B, sys.Q, sys.R);
    EXPECT_LE(s.residual, 1e-9);
    EXPECT_LE(care_residual(sys.A, sys.B, sys.Q, sys.R, s.P), 1e-9);
    EXPECT_LT((s.P - s.P.transpose()).norm(), 1e-10 * s.P.norm());
    const MatrixXd K = lqr_gain(s.P, sys.B, sys.R);
    EXPECT_LT(spectral_abscissa(sys.A - sys.B * K), 0.0);

    const MatrixXd K0 = testing::continuation_stabilizing_gain(sys.A, sys.B, sys.Q, sys.R);
    ASSERT_LT(spectral_abscissa(sys.A - sys.B * K0), 0.0);
    const CareSolution nk = solve_care_newton(sys.A, sys.B, sys.Q, sys.R, K0, 200);
    EXPECT_LE((s.P - nk.P).norm() / s.P.norm(), 1e-7)
        << "schur residual " << s.residual << ", newton residual " << nk.residual
        << ", |P| " << s.P.norm();
  }
}

TEST(Care, BassGainStabilizes) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const testing::RandomSystem sys = testing::random_system(rng, 4, 2);
    const MatrixXd K = bass_stabilizing_gain(sys.A, sys.B);
    EXPECT_LT(spectral_abscissa(sys.A - sys.B * K), 0.0);
  }
  EXPECT_THROW(bass_stabilizing_gain(MatrixXd::Identity(1, 1), MatrixXd::Zero(1, 1)),
               NotStabilizable);
}

TEST(Care, DefaultAugmentedPlant) {
  const AugmentedModel aug = default_augmented();
  const CostMatrices c = cost_matrices(aug, LqgWeights::defaults());
  const CareSolution s = solve_care(aug.A(), aug.Br(), c.Q, c.R);
  EXPECT_LE(s.residual, 1e-9);
  const MatrixXd K = lqr_gain(s.P, aug.Br(), c.R);
  EXPECT_LT(spectral_abscissa(aug.A() - aug.Br() * K), 0.0);
}

TEST(Care, Errors) {
  const MatrixXd one = MatrixXd::Identity(1, 1);
  EXPECT_THROW(solve_care(one, MatrixXd::Zero(1, 1), one, one), NotStabilizable);
  EXPECT_THROW(solve_care(one, one, MatrixXd::Zero(1, 1), one), NotDetectable);
  EXPECT_THROW(solve_care(one, one, one, -one), InvalidParameter);
  EXPECT_THROW(solve_care(one, MatrixXd::Zero(2, 1), one, one), DimensionMismatch);
  MatrixXd Q(2, 2);
  Q << 1, 1, 0, 1;
  EXPECT_THROW(solve_care(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2), Q,
                          MatrixXd::Identity(2, 2)),
               InvalidParameter);
  EXPECT_THROW(solve_care_newton(one, one, one, one, MatrixXd::Zero(1, 1)), NotStabilizing);
}

TEST(Care, CrossWeightMatchesCompletedSquare) {
  // Cost x'Qx + 2x'Nu + u'Ru equals the problem with A - B R^-1 N',
  // Q - N R^-1 N' and no cross term.
  std::mt19937_64 rng(7);
  const testing::RandomSystem sys = testing::random_system(rng, 5, 2);
  const MatrixXd N = 0.1 * sys.B;
  const CareSolution s = solve_care(sys.A, sys.B, sys.Q + N * sys.R.inverse() * N.transpose(),
                                    sys.R, N);
  const CareSolution t = solve_care(sys.A - sys.B * sys.R.inverse() * N.transpose(), sys.B,
                                    sys.Q, sys.R);
  EXPECT_LE(s.residual, 1e-9);
  EXPECT_LT((s.P - t.P).norm() / t.P.norm(), 1e-9);
}

TEST(Lyapunov, MatchesKroneckerSolve) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int n : {1, 3, 6, 10}) {
    MatrixXd A(n, n), Qf(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = g(rng), Qf(i, j) = g(rng);
    A -= (std::abs(EigenSolver<MatrixXd>(A).eigenvalues().real().maxCoeff()) + 1.0) *
         MatrixXd::Identity(n, n);
    const MatrixXd Q = Qf * Qf.transpose();
    // vec(A'X + XA) = (I kron A' + A' kron I) vec(X)
    MatrixXd Kr = MatrixXd::Zero(n * n, n * n);
    const MatrixXd I = MatrixXd::Identity(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Kr.block(a * n, b * n, n, n) += I(a, b) * A.transpose();
        Kr.block(a * n, b * n, n, n) += A(b, a) * I;
      }
    const VectorXd vecQ = Eigen::Map<const VectorXd>(Q.data(), n * n);
    const VectorXd vecX = Kr.fullPivLu().solve(-vecQ);
    const MatrixXd X_oracle = Eigen::Map<const MatrixXd>(vecX.data(), n, n);
    const MatrixXd X = solve_lyapunov(A, Q);
    EXPECT_LT((X - X_oracle).norm(), 1e-10 * (1.0 + X_oracle.norm())) << "n=" << n;
  }
}

TEST(Lyapunov, SingularEquationRejected) {
  MatrixXd A(2, 2);
  A << 1, 0, 0, -1;  // lambda_1 + lambda_2 = 0
  EXPECT_THROW(solve_lyapunov(A, MatrixXd::Identity(2, 2)), DegenerateModel);
}

TEST(Schur, OrderedFactorization) {
  std::mt19937_64 rng(3);
  const testing::RandomSystem sys = testing::random_system(rng, 7, 1);
  const OrderedSchur s = ordered_real_schur(sys.A);
  EXPECT_LT((s.U * s.T * s.U.transpose() - sys.A).norm(), 1e-12 * sys.A.norm());
  EXPECT_LT((s.U.transpose() * s.U - MatrixXd::Identity(7, 7)).norm(), 1e-12);
  int stable = 0;
  for (const auto& z : spectrum(sys.A)) stable += z.real() < 0.0;
  EXPECT_EQ(s.num_selected, stable);
  const auto lead = spectrum(s.T.topLeftCorner(stable, stable));
  for (const auto& z : lead) EXPECT_LT(z.real(), 0.0);
}

TEST(RankTests, StabilizableAndDetectable) {
  const MatrixXd A = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  EXPECT_FALSE(is_stabilizable(A, MatrixXd(Eigen::Vector2d(0, 1))));
  EXPECT_TRUE(is_stabilizable(A, MatrixXd(Eigen::Vector2d(1, 0))));
  EXPECT_FALSE(is_detectable(A, MatrixXd(Eigen::RowVector2d(0, 1))));
  EXPECT_TRUE(is_detectable(A, MatrixXd(Eigen::RowVector2d(1, 0))));
}

TEST(Lqr, GainIsLocallyOptimal) {
  const AugmentedModel aug = default_augmented();
  const CostMatrices c = cost_matrices(aug, LqgWeights::defaults());
  ASSERT_EQ(c.N.norm(), 0.0);
  const MatrixXd K = lqr_gain(solve_care(aug.A(), aug.Br(), c.Q, c.R).P, aug.Br(), c.R);
  const MatrixXd PK = lqr_cost_matrix(aug.A(), aug.Br(), c.Q, c.R, K);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd delta(K.rows(), K.cols());
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = g(rng);
    delta *= 1e-2 * K.norm() / delta.norm();
    const MatrixXd Kp = K + delta;
    if (spectral_abscissa(aug.A() - aug.Br() * Kp) >= 0.0) continue;
    ++checked;
    const MatrixXd gap = lqr_cost_matrix(aug.A(), aug.Br(), c.Q, c.R, Kp) - PK;
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (gap + gap.transpose())).eigenvalues()(0);
    EXPECT_GE(min_eig, -1e-9 * PK.norm()) << "trial " << trial;
    EXPECT_GE(gap.trace(), 0.0);
  }
  EXPECT_GT(checked, 10);
}

TEST(Lqr, HomogeneousInWeights) {
  const AugmentedModel aug = default_augmented();
  LqgWeights w = LqgWeights::defaults();
  const LqgDesign d1 = design_lqg(aug, w);
  w.Q *= 7.0;
  w.R_w *= 7.0;
  const LqgDesign d2 = design_lqg(aug, w);
  EXPECT_LE((d1.K - d2.K).norm() / d1.K.norm(), 1e-9);
}

TEST(Kalman, DualOfRegulator) {
  std::mt19937_64 rng(9);
  const testing::RandomSystem sys = testing::random_system(rng, 6, 2);
  const MatrixXd C = sys.B.transpose();
  const MatrixXd W = sys.Q;
  const MatrixXd V = sys.R;
  const MatrixXd L = kalman_gain(sys.A, C, W, V);
  const CareSolution dual = solve_care(sys.A.transpose(), C.transpose(), W, V);
  const MatrixXd K_dual = lqr_gain(dual.P, C.transpose(), V);
  EXPECT_LT((L - K_dual.transpose()).norm(), 1e-12 * (1.0 + L.norm()));
  EXPECT_LT(spectral_abscissa(sys.A - L * C), 0.0);
}

TEST(Kalman, NoisierMeasurementsShrinkGain) {
  const AugmentedModel aug = default_augmented();
  LqgWeights w = LqgWeights::defaults();
  const double base = design_lqg(aug, w).L.norm();
  w.V_n *= 100.0;
  EXPECT_LT(design_lqg(aug, w).L.norm(), base);
}

TEST(Kalman, EstimateConvergesFromMismatchedStart) {
  const SystemConfig cfg;
  const CaseModel c = build_case(cfg, 1);
  ASSERT_TRUE(c.lqg.has_value());
  const MatrixXd& A = c.plant.A;
  const MatrixXd Cm = c.plant.C.topRows(AugmentedModel::kNumMeasured);
  const double slowest = -spectral_abscissa(A - c.lqg->L * Cm);
  ASSERT_GT(slowest, 0.0);
  const double horizon = 20.0 / slowest;

  VectorXd x0 = VectorXd::Zero(c.plant.num_states());
  x0(c.plant.state_index("fi")) = 0.01;
  x0(c.plant.state_index("Vdcr")) = -0.02;
  x0(c.plant.state_index("Pgr")) = 0.05;
  SimulationOptions opt;
  opt.horizon = horizon;
  const DisturbanceProfile zero = make_step_profile({}, opt.dt, horizon);
  const ScenarioResult r = integrate(c.plant, c.controller, zero, NoiseSpec{}, opt, x0,
                                     VectorXd::Zero(c.plant.num_states()));
  const double e0 = x0.norm();
  const Eigen::Index last = r.states.rows() - 1;
  const double e_end = (r.controller.row(last) - r.states.row(last)).norm();
  EXPECT_LE(e_end, 1e-6 * e0) << "horizon " << horizon << " s";
}

TEST(Separation, FullLoopSpectrumIsUnion) {
  const AugmentedModel aug = default_augmented();
  const LqgDesign d = design_lqg(aug, LqgWeights::defaults());
  const StateSpaceModel full = close_loop(aug.sys, AugmentedModel::kNumReferences, d.controller);
  auto expected = spectrum(aug.A() - aug.Br() * d.K);
  const auto est = spectrum(aug.A() - d.L * aug.Cm());
  expected.insert(expected.end(), est.begin(), est.end());
  EXPECT_LE(spectrum_mismatch(spectrum(full.A), expected), 1e-6);
}

TEST(ClosedLoop, IntegralActionRejectsConstantDisturbances) {
  const AugmentedModel aug = default_augmented();
  const LqgDesign d = design_lqg(aug, LqgWeights::defaults());
  const StateSpaceModel V = closed_loop(aug, d.K);
  EXPECT_LT((V.A - (aug.A() - aug.Br() * d.K)).norm(), 1e-15);
  const MatrixXd G = dc_gain(V);
  for (const std::string y : {"fi", "fr", "Vdcr", "Vdrop"})
    for (int k = 0; k < 2; ++k)
      EXPECT_NEAR(G(V.output_index(y), k), 0.0, 1e-9) << y << " from input " << k;
}

TEST(ClosedLoop, ZeroDisturbanceGivesZeroOutput) {
  const AugmentedModel aug = default_augmented();
  const LqgDesign d = design_lqg(aug, LqgWeights::defaults());
  const StateSpaceModel V = closed_loop(aug, d.K);
  const auto tr = testing::simulate_lti(V, [&](double) { return VectorXd::Zero(2); }, 1e-3, 1.0);
  EXPECT_EQ(tr.y.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(closed_loop(aug, MatrixXd::Zero(4, aug.sys.num_states())), NotStabilizing);
}

TEST(Weights, ValidationRejectsBadEntries) {
  LqgWeights w = LqgWeights::defaults();
  EXPECT_NO_THROW(w.validate());
  w.R_w(2) = 0.0;
  EXPECT_THROW(w.validate(), InvalidParameter);
  w = LqgWeights::defaults();
  w.V_n(0) = 0.0;
  EXPECT_THROW(w.validate(), InvalidParameter);
  w = LqgWeights::defaults();
  w.Q(4) = -1.0;
  EXPECT_THROW(w.validate(), InvalidParameter);
  w = LqgWeights::defaults();
  w.Q.resize(3);
  EXPECT_THROW(w.validate(), DimensionMismatch);
  EXPECT_EQ(augmented_weight_labels().size(), 15u);
}

TEST(Pi, InverterOnlyStrategyHasNoRectifierFrequencyFeedback) {
  const auto loops = build_pi_controller(3, PiGains{});
  for (const auto& l : loops) {
    EXPECT_FALSE(l.channel == 3) << "voltage reference is driven";
    EXPECT_FALSE(l.signal == "fr" && l.channel != 1);
  }
  const LinearController c = realize_pi(loops);
  // fi feeds both its generator and the current reference through one integrator.
  EXPECT_EQ(c.state_labels, (std::vector<std::string>{"pi_int_fi", "pi_int_fr"}));
  EXPECT_EQ(c.Cc.row(3).norm(), 0.0);
  EXPECT_EQ(c.Dc.row(3).norm(), 0.0);
}

TEST(Pi, GainsFollowConfiguredValues) {
  const PiGains g;
  EXPECT_EQ(g.gen_kp, 9.0);
  EXPECT_EQ(g.gen_ki, 6.0);
  const LinearController c = realize_pi(build_pi_controller(2, g));
  EXPECT_EQ(c.input_labels, (std::vector<std::string>{"fi", "fr", "Idci", "Vdcr"}));
  EXPECT_DOUBLE_EQ(c.Dc(0, 0), -9.0);
  EXPECT_DOUBLE_EQ(c.Cc(0, 0), -6.0);
  EXPECT_DOUBLE_EQ(c.Dc(2, 2), -9.0);
}

TEST(Pi, ZeroGainsReduceToPlant) {
  const PlantModel plant = build_plant(SystemConfig{});
  const LinearController c = realize_pi(build_pi_controller(2, PiGains{0, 0, 0, 0}));
  EXPECT_EQ(c.Ac.rows(), 0);
  const StateSpaceModel cl = close_loop(plant.sys, PlantModel::kNumReferences, c);
  EXPECT_LT((cl.A - plant.sys.A).norm(), 1e-15);
  EXPECT_LT((cl.B - plant.Bw()).norm(), 1e-15);
}

TEST(Pi, Errors) {
  EXPECT_THROW(build_pi_controller(1, PiGains{}), UnknownCase);
  EXPECT_THROW(build_pi_controller(4, PiGains{}), UnknownCase);
  EXPECT_THROW(build_pi_controller(2, PiGains{-1, 0, 0, 0}), InvalidParameter);
}

TEST(Pi, ConventionalStrategyRestoresFrequencies) {
  const SystemConfig cfg;
  const CaseModel c = build_case(cfg, 2);
  SimulationOptions opt;
  opt.horizon = 30.0;
  const ScenarioResult r =
      run_case(c, canonical_step_profile(opt.dt, opt.horizon), NoiseSpec{}, opt);
  const Eigen::Index last = r.outputs.rows() - 1;
  EXPECT_LE(std::abs(r.outputs(last, r.output_column("fi"))), 1e-3);
  EXPECT_LE(std::abs(r.outputs(last, r.output_column("fr"))), 1e-3);
}

TEST(Cases, EveryStrategyIsHurwitzAtConstruction) {
  const SystemConfig cfg;
  for (int id : {1, 2, 3}) {
    const CaseModel c = build_case(cfg, id);
    EXPECT_LT(c.spectral_abscissa, 0.0) << c.name();
    const StateSpaceModel cl = close_loop(c.plant, 4, c.controller);
    EXPECT_LT(spectral_abscissa(cl.A), 0.0) << c.name();
  }
  EXPECT_THROW(build_case(cfg, 0), UnknownCase);
}

}  // namespace
}  // namespace hvdc
