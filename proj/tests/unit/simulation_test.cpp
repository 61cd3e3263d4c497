#include "hvdc/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "hvdc/errors.hpp"
#include "test_support.hpp"

namespace hvdc {
namespace {

const SystemConfig& config() {
  static const SystemConfig cfg;
  return cfg;
}

const CaseModel& case_model(int id) {
  static const CaseModel c1 = build_case(config(), 1);
  static const CaseModel c2 = build_case(config(), 2);
  static const CaseModel c3 = build_case(config(), 3);
  return id == 1 ? c1 : id == 2 ? c2 : c3;
}

SimulationOptions options(double horizon, double dt = 1e-3) {
  SimulationOptions o;
  o.dt = dt;
  o.horizon = horizon;
  return o;
}

ScenarioResult run(int id, const DisturbanceProfile& p, double horizon, double dt = 1e-3) {
  return run_case(case_model(id), p, NoiseSpec{}, options(horizon, dt));
}

// Largest |x| over samples with t in [t0, t1].
double window_max(const ScenarioResult& r, const std::string& signal, double t0, double t1) {
  const VectorXd v = r.output(signal);
  double m = 0.0;
  for (std::size_t k = 0; k < r.t.size(); ++k)
    if (r.t[k] >= t0 - 1e-9 && r.t[k] <= t1 + 1e-9) m = std::max(m, std::abs(v(k)));
  return m;
}

double final_value(const ScenarioResult& r, const std::string& signal) {
  return r.output(signal)(r.outputs.rows() - 1);
}

// First time after t0 at which |x| reaches half its peak over [t0, t1].
double half_peak_time(const ScenarioResult& r, const std::string& signal, double t0, double t1) {
  const double half = 0.5 * window_max(r, signal, t0, t1);
  const VectorXd v = r.output(signal);
  for (std::size_t k = 0; k < r.t.size(); ++k)
    if (r.t[k] >= t0 && std::abs(v(k)) >= half) return r.t[k] - t0;
  return INFINITY;
}

DisturbanceProfile sustained(int channel, double magnitude, double horizon) {
  return make_step_profile({{channel, 5.0, magnitude, 0.0}}, 1e-3, horizon);
}

TEST(Profiles, CanonicalStepEvents) {
  const DisturbanceProfile p = canonical_step_profile();
  ASSERT_EQ(p.size(), 60001u);
  auto at = [&](const std::vector<double>& v, double t) { return v[std::llround(t / p.dt)]; };
  EXPECT_EQ(at(p.P_li, 4.999), 0.0);
  EXPECT_EQ(at(p.P_li, 5.0), 0.3);
  EXPECT_EQ(at(p.P_li, 19.999), 0.3);
  EXPECT_EQ(at(p.P_li, 20.0), 0.0);
  EXPECT_EQ(at(p.P_lr, 34.999), 0.0);
  EXPECT_EQ(at(p.P_lr, 35.0), 0.3);
  EXPECT_EQ(at(p.P_lr, 50.0), 0.0);
  for (double w : p.P_w) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(p.provenance, ProfileKind::kStep);
}

TEST(Profiles, ZeroMagnitudeGivesZeroProfile) {
  const DisturbanceProfile p = make_step_profile(canonical_step_events(0.0), 1e-3, 60.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_EQ(p.P_li[k], 0.0);
    EXPECT_EQ(p.P_lr[k], 0.0);
  }
  EXPECT_THROW(make_step_profile({{0, 5.0, 1.0, 0.0}, {0, 2.0, 1.0, 0.0}}, 1e-3, 10.0),
               InvalidParameter);
  EXPECT_THROW(make_step_profile({{3, 5.0, 1.0, 0.0}}, 1e-3, 10.0), InvalidParameter);
}

TEST(Profiles, ContinuousPeakAndDeterminism) {
  const ContinuousProfileSpec shape;
  const DisturbanceProfile a = make_continuous_profile(shape, 42, 200.0);
  const DisturbanceProfile b = make_continuous_profile(shape, 42, 200.0);
  const DisturbanceProfile c = make_continuous_profile(shape, 43, 200.0);
  for (const auto* ch : {&a.P_li, &a.P_lr, &a.P_w}) {
    double peak = 0.0;
    for (double v : *ch) peak = std::max(peak, std::abs(v));
    EXPECT_NEAR(peak, shape.peak, 1e-9);
  }
  EXPECT_EQ(a.P_li, b.P_li);
  EXPECT_EQ(a.P_lr, b.P_lr);
  EXPECT_EQ(a.P_w, b.P_w);
  EXPECT_NE(a.P_li, c.P_li);
  EXPECT_EQ(a.provenance, ProfileKind::kContinuous);
  ContinuousProfileSpec no_wind;
  no_wind.include_wind = false;
  for (double v : make_continuous_profile(no_wind, 42, 10.0).P_w) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(make_continuous_profile(shape, 1, 0.0), InvalidParameter);
}

TEST(Profiles, CsvRoundTripIsBitExact) {
  const DisturbanceProfile a = make_continuous_profile(ContinuousProfileSpec{}, 7, 5.0);
  std::stringstream ss;
  write_profile_csv(ss, a);
  const DisturbanceProfile b = read_profile_csv(ss);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.P_li, b.P_li);
  EXPECT_EQ(a.P_lr, b.P_lr);
  EXPECT_EQ(a.P_w, b.P_w);
  EXPECT_EQ(b.provenance, ProfileKind::kImported);
  std::stringstream again;
  write_profile_csv(again, b);
  std::stringstream first;
  write_profile_csv(first, a);
  EXPECT_EQ(first.str(), again.str());
}

TEST(Profiles, MalformedCsvRejected) {
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return read_profile_csv(is);
  };
  EXPECT_THROW(parse(""), FileFormat);
  EXPECT_THROW(parse("t,a,b,c\n0,0,0,0\n"), FileFormat);
  EXPECT_THROW(parse("t,P_li,P_lr,P_w\n0,0,0,0\n"), FileFormat);
  EXPECT_THROW(parse("t,P_li,P_lr,P_w\n0,0,0,0\n0.001,0,0\n"), FileFormat);
  EXPECT_THROW(parse("t,P_li,P_lr,P_w\n0,0,0,0\n0.001,x,0,0\n"), FileFormat);
  EXPECT_THROW(parse("t,P_li,P_lr,P_w\n0,0,0,0\n0.001,0,0,0\n0.003,0,0,0\n"), FileFormat);
  EXPECT_THROW(parse("t,P_li,P_lr,P_w\n0,0,0,0\n0.001,nan,0,0\n"), FileFormat);
  EXPECT_THROW(read_profile_csv_file("/nonexistent/profile.csv"), FileFormat);
  EXPECT_NO_THROW(parse("t,P_li,P_lr,P_w\r\n0,0,0,0\r\n0.001,0.1,0,0\r\n"));
}

TEST(Metrics, ConstantSignal) {
  const SignalMetrics m = signal_metrics(VectorXd::Constant(1000, -0.25));
  EXPECT_DOUBLE_EQ(m.max_abs, 0.25);
  EXPECT_NEAR(m.rms, 0.25, 1e-15);
}

TEST(Metrics, SineOverWholePeriods) {
  const int M = 100000;
  VectorXd v(M);
  for (int k = 0; k < M; ++k) v(k) = 0.7 * std::sin(2.0 * M_PI * 5.0 * k / M);
  const SignalMetrics m = signal_metrics(v);
  EXPECT_NEAR(m.rms, 0.7 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(m.max_abs, 0.7, 1e-6);
}

TEST(Metrics, RecomputableFromTrajectories) {
  const ScenarioResult r = run(1, canonical_step_profile(), 60.0);
  for (const auto& [name, sm] : r.metrics.signals) {
    const VectorXd v = r.output(name);
    const double oracle = testing::rms_long_double(v);
    EXPECT_LE(std::abs(sm.rms - oracle), 1e-12 * std::max(oracle, 1e-300)) << name;
    EXPECT_EQ(sm.max_abs, v.cwiseAbs().maxCoeff()) << name;
  }
  const Metrics& m = r.metrics;
  EXPECT_DOUBLE_EQ(m.freq_max_total, m.at("fi").max_abs + m.at("fr").max_abs);
  EXPECT_DOUBLE_EQ(m.freq_rms_total, m.at("fi").rms + m.at("fr").rms);
  EXPECT_DOUBLE_EQ(m.gen_rms_total, m.at("Pgi").rms + m.at("Pgr").rms);
  EXPECT_DOUBLE_EQ(m.vdc_max_percent,
                   100.0 * std::max(m.at("Vdcr").max_abs, m.at("Vdci").max_abs));
  EXPECT_THROW(m.at("nope"), InvalidParameter);
  const Metrics again = compute_metrics(r);
  EXPECT_EQ(again.freq_rms_total, m.freq_rms_total);
}

TEST(Integrate, ZeroInputsStayAtZero) {
  for (int id : {1, 2, 3}) {
    const ScenarioResult r = run(id, make_step_profile({}, 1e-3, 5.0), 5.0);
    EXPECT_EQ(r.states.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.outputs.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.references.cwiseAbs().maxCoeff(), 0.0);
    if (r.controller.size()) EXPECT_EQ(r.controller.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Integrate, AgreesWithExactZeroOrderHoldSolution) {
  const CaseModel& c = case_model(2);
  const StateSpaceModel cl = close_loop(c.plant, 4, c.controller);
  const DisturbanceProfile p = canonical_step_profile(1e-3, 10.0);
  const double h = 1e-4;
  const ScenarioResult r = run(2, p, 10.0, h);
  // exp([A B; 0 0] h) = [Phi Gamma; 0 I] advances x exactly under a held input.
  const int nz = cl.num_states(), nw = 2, n = c.plant.num_states();
  MatrixXd M = MatrixXd::Zero(nz + nw, nz + nw);
  M.topLeftCorner(nz, nz) = cl.A * h;
  M.topRightCorner(nz, nw) = cl.B.leftCols(nw) * h;
  const MatrixXd E = M.exp();
  const MatrixXd Phi = E.topLeftCorner(nz, nz), Gamma = E.topRightCorner(nz, nw);
  VectorXd x = VectorXd::Zero(nz);
  double worst = 0.0;
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    worst = std::max(worst, (x.head(n).transpose() - r.states.row(k)).cwiseAbs().maxCoeff());
    x = Phi * x + Gamma * p.w(k / 10);
  }
  EXPECT_LT(worst, 1e-8 * r.states.cwiseAbs().maxCoeff());
}

TEST(Integrate, RichardsonOrderOnStepScenario) {
  const DisturbanceProfile p = canonical_step_profile(1e-3, 10.0);
  const ScenarioResult r1 = run(1, p, 10.0, 1e-3);
  const ScenarioResult r2 = run(1, p, 10.0, 5e-4);
  const ScenarioResult r4 = run(1, p, 10.0, 2.5e-4);
  double e12 = 0.0, e24 = 0.0;
  for (Eigen::Index k = 0; k < r1.states.rows(); ++k) {
    e12 = std::max(e12, (r1.states.row(k) - r2.states.row(2 * k)).cwiseAbs().maxCoeff());
    e24 = std::max(e24, (r2.states.row(2 * k) - r4.states.row(4 * k)).cwiseAbs().maxCoeff());
  }
  const double order = std::log2(e12 / e24);
  EXPECT_GE(order, 3.5) << "e(dt, dt/2) = " << e12 << ", e(dt/2, dt/4) = " << e24;
}

TEST(Integrate, LinearInProfile) {
  const DisturbanceProfile p = canonical_step_profile(1e-3, 60.0);
  DisturbanceProfile p2 = p;
  for (auto* ch : {&p2.P_li, &p2.P_lr, &p2.P_w})
    for (double& v : *ch) v *= 2.0;
  for (int id : {1, 2, 3}) {
    const ScenarioResult a = run(id, p, 60.0), b = run(id, p2, 60.0);
    const double scale = a.states.cwiseAbs().maxCoeff();
    EXPECT_LE((b.states - 2.0 * a.states).cwiseAbs().maxCoeff(), 1e-9 * scale) << id;
    EXPECT_LE((b.outputs - 2.0 * a.outputs).cwiseAbs().maxCoeff(),
              1e-9 * a.outputs.cwiseAbs().maxCoeff())
        << id;
  }
}

TEST(Integrate, NegativeStepMirrorsPositiveStep) {
  const ScenarioResult pos = run(1, canonical_step_profile(1e-3, 60.0), 60.0);
  const ScenarioResult neg =
      run(1, make_step_profile(canonical_step_events(-0.3), 1e-3, 60.0), 60.0);
  EXPECT_LE((pos.outputs + neg.outputs).cwiseAbs().maxCoeff(),
            1e-9 * pos.outputs.cwiseAbs().maxCoeff());
}

TEST(Integrate, EstimatorTracksExactInitialState) {
  const CaseModel& c = case_model(1);
  VectorXd x0 = VectorXd::Zero(c.plant.num_states());
  x0(c.plant.state_index("fi")) = -0.02;
  x0(c.plant.state_index("Idci")) = 0.05;
  x0(c.plant.state_index("int_fr")) = 0.01;
  const ScenarioResult r = integrate(c.plant, c.controller, make_step_profile({}, 1e-3, 30.0),
                                     NoiseSpec{}, options(30.0), x0, x0);
  EXPECT_LE((r.controller - r.states).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(r.states.cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Integrate, SeedDeterminism) {
  NoiseSpec noise;
  noise.input_std = VectorXd::Constant(4, 1e-3);
  noise.measurement_std = {{"fi", 1e-4}, {"Vdcr", 1e-4}};
  noise.seed = 99;
  ASSERT_TRUE(noise.active());
  const DisturbanceProfile p = canonical_step_profile(1e-3, 10.0);
  auto serialize = [&](std::uint64_t seed) {
    NoiseSpec n = noise;
    n.seed = seed;
    const ScenarioResult r = run_case(case_model(1), p, n, options(10.0));
    std::ostringstream os;
    write_trajectory_csv(os, r);
    return os.str();
  };
  const std::string a = serialize(99), b = serialize(99), c = serialize(100);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Integrate, Errors) {
  const CaseModel& c = case_model(2);
  const DisturbanceProfile p = canonical_step_profile(1e-3, 10.0);
  EXPECT_THROW(run_case(c, p, NoiseSpec{}, options(10.0, 2e-3)), StepTooLarge);
  EXPECT_THROW(run_case(c, p, NoiseSpec{}, options(20.0)), InvalidParameter);
  EXPECT_THROW(run_case(c, p, NoiseSpec{}, options(5.0, 3e-4)), InvalidParameter);
  NoiseSpec bad;
  bad.input_std = VectorXd::Constant(3, 1.0);
  EXPECT_THROW(run_case(c, p, bad, options(5.0)), DimensionMismatch);
  bad.input_std = VectorXd::Constant(4, -1.0);
  EXPECT_THROW(run_case(c, p, bad, options(5.0)), InvalidParameter);

  const StateSpaceModel unstable =
      make_model(MatrixXd::Constant(1, 1, 1.0), MatrixXd::Zero(1, 6), MatrixXd::Identity(1, 1),
                 MatrixXd::Zero(1, 6), {"x"}, plant_input_labels(), {"x"});
  const DisturbanceProfile quiet = make_step_profile({}, 1e-3, 20.0);
  try {
    integrate(unstable, zero_controller(), quiet, NoiseSpec{}, options(20.0),
              VectorXd::Ones(1));
    FAIL() << "expected UnstableBlowup";
  } catch (const UnstableBlowup& e) {
    EXPECT_NE(std::string(e.what()).find("state x"), std::string::npos);
  }
}

TEST(Integrate, TrajectoryCsvLayout) {
  const ScenarioResult r = run(2, canonical_step_profile(1e-3, 1.0), 1.0);
  std::ostringstream os;
  write_trajectory_csv(os, r, 10);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  EXPECT_EQ(header.rfind("t,fi,Pgi", 0), 0u);
  EXPECT_NE(header.find(",Pdci"), std::string::npos);
  EXPECT_NE(header.find(",Pgi_ref"), std::string::npos);
  EXPECT_NE(header.find(",pi_int_fi"), std::string::npos);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 101);
  EXPECT_THROW(write_trajectory_csv(os, r, 0), InvalidParameter);
}

TEST(Scenarios, LqgRestoresFrequencyBeforeSecondEvent) {
  const ScenarioResult r = run(1, canonical_step_profile(), 60.0);
  EXPECT_GT(window_max(r, "fi", 5.0, 20.0), 1e-3);
  EXPECT_LE(window_max(r, "fi", 32.0, 34.999), 1e-3);
}

TEST(Scenarios, IntegralActionRejectsSustainedSteps) {
  for (int id : {1, 2}) {
    for (int channel : {0, 1}) {
      const ScenarioResult r = run(id, sustained(channel, 0.3, 35.0), 35.0);
      for (const std::string s : {"fi", "fr", "Vdcr"})
        EXPECT_LE(window_max(r, s, 30.0, 35.0), 1e-3)
            << "case " << id << ", channel " << channel << ", " << s;
    }
  }
}

TEST(Scenarios, LqgSharesLoadBetweenGenerators) {
  const ScenarioResult r = run(1, sustained(0, 0.3, 60.0), 60.0);
  const double gi = final_value(r, "Pgi"), gr = final_value(r, "Pgr");
  EXPECT_GT(gi, 0.0);
  EXPECT_GT(gr, 0.0);
  EXPECT_LE(std::abs(gi - gr), 0.35 * std::max(gi, gr)) << "Pgi " << gi << ", Pgr " << gr;
}

TEST(Scenarios, ConventionalControlKeepsLoadLocal) {
  const ScenarioResult r = run(2, sustained(0, 0.3, 60.0), 60.0);
  EXPECT_GE(final_value(r, "Pgi"), 0.8 * 0.3) << "Pgr " << final_value(r, "Pgr");
  const ScenarioResult s = run(2, sustained(1, 0.3, 60.0), 60.0);
  EXPECT_GE(final_value(s, "Pgr"), 0.8 * 0.3) << "Pgi " << final_value(s, "Pgi");
}

TEST(Scenarios, ConvertersReactFasterThanGenerators) {
  for (int id : {1, 2, 3}) {
    const ScenarioResult r = run(id, canonical_step_profile(), 60.0);
    EXPECT_LT(half_peak_time(r, "Pdci", 5.0, 20.0), half_peak_time(r, "Pgi", 5.0, 20.0))
        << "case " << id;
    EXPECT_LT(half_peak_time(r, "Pdcr", 35.0, 50.0), half_peak_time(r, "Pgr", 35.0, 50.0))
        << "case " << id;
  }
}

TEST(CaseMatrix, EmptyListGivesEmptyResult) {
  CaseMatrixConfig cfg;
  EXPECT_TRUE(run_case_matrix(cfg).empty());
}

TEST(CaseMatrix, FailureIsRecordedAndOthersRun) {
  CaseMatrixConfig cfg;
  cfg.step_horizon = 2.0;
  cfg.imported_profile = "/nonexistent/profile.csv";
  cfg.scenarios = {{1, CaseVariant::kDefault, ProfileKind::kImported},
                   {2, CaseVariant::kDefault, ProfileKind::kStep},
                   {7, CaseVariant::kDefault, ProfileKind::kStep}};
  const auto out = run_case_matrix(cfg);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_FALSE(out[0].result.has_value());
  EXPECT_FALSE(out[0].error.empty());
  ASSERT_TRUE(out[1].result.has_value());
  EXPECT_EQ(out[1].result->t.size(), 2001u);
  EXPECT_FALSE(out[2].result.has_value());
  std::ostringstream os;
  write_metrics_report(os, out);
  EXPECT_NE(os.str().find("status: failed"), std::string::npos);
  EXPECT_NE(os.str().find("status: ok"), std::string::npos);
}

TEST(CaseMatrix, ImportedProfileRunsVerbatim) {
  const auto dir = std::filesystem::temp_directory_path() / "hvdc_sim_import";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "profile.csv").string();
  {
    std::ofstream f(path);
    write_profile_csv(f, make_step_profile({{1, 0.5, 0.1, 0.0}}, 1e-3, 2.0));
  }
  CaseMatrixConfig cfg;
  cfg.imported_profile = path;
  cfg.scenarios = {{2, CaseVariant::kDefault, ProfileKind::kImported}};
  const auto out = run_case_matrix(cfg);
  ASSERT_TRUE(out[0].result.has_value()) << out[0].error;
  EXPECT_EQ(out[0].result->t.size(), 2001u);
  EXPECT_GT(out[0].result->metrics.at("fr").max_abs, 0.0);
}

TEST(CaseMatrix, PairedStepComparisons) {
  CaseMatrixConfig cfg;
  cfg.scenarios = {{1, CaseVariant::kDefault, ProfileKind::kStep},
                   {2, CaseVariant::kDefault, ProfileKind::kStep},
                   {3, CaseVariant::kDefault, ProfileKind::kStep}};
  const auto out = run_case_matrix(cfg);
  for (const auto& o : out) ASSERT_TRUE(o.result.has_value()) << o.error;
  const Metrics& m1 = out[0].result->metrics;
  const Metrics& m2 = out[1].result->metrics;
  const Metrics& m3 = out[2].result->metrics;
  EXPECT_LT(m1.freq_max_total, m2.freq_max_total);
  EXPECT_LT(m3.at("fi").max_abs, m1.at("fi").max_abs);
  EXPECT_GT(m3.at("fr").max_abs, m1.at("fr").max_abs);
}

TEST(CrossValidation, ReportsEverySignal) {
  const CrossValidation cv = cross_validate(config(), 0.3, 5.0, 6.0);
  ASSERT_EQ(cv.signals.size(), 7u);
  for (const auto& s : cv.signals) {
    EXPECT_GT(s.peak, 0.0) << s.signal;
    EXPECT_EQ(s.pass, s.discrepancy <= cv.threshold);
  }
  EXPECT_DOUBLE_EQ(reduction(0.7, 1.0), 0.3);
}

}  // namespace
}  // namespace hvdc
