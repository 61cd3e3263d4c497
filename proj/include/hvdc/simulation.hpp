#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hvdc/control_synthesis.hpp"
#include "hvdc/system_config.hpp"

namespace hvdc {

enum class ProfileKind { kStep, kContinuous, kImported };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& s);

/// Load and wind variations on a uniform grid, in per unit.
struct DisturbanceProfile {
  double dt = 1e-3;
  std::vector<double> t;
  std::vector<double> P_li;
  std::vector<double> P_lr;
  std::vector<double> P_w;
  ProfileKind provenance = ProfileKind::kStep;

  std::size_t size() const { return t.size(); }
  /// Throws FileFormat on inconsistent lengths, a non-uniform grid or
  /// non-finite values.
  void validate() const;
  /// Plant disturbance inputs [Pli, Plr - Pw] at sample k.
  Eigen::Vector2d w(std::size_t k) const { return {P_li[k], P_lr[k] - P_w[k]}; }
};

/// Channel 0: P_li, 1: P_lr, 2: P_w. The step is held for `hold` seconds
/// then returns to zero; a non-positive hold keeps it on.
struct StepEvent {
  int channel = 0;
  double time = 0.0;
  double magnitude = 0.0;
  double hold = 0.0;
};

DisturbanceProfile make_step_profile(const std::vector<StepEvent>& events,
                                     double dt, double horizon);

/// 0.3 pu on P_li at 5 s and on P_lr at 35 s, each for 15 s.
std::vector<StepEvent> canonical_step_events(double magnitude = 0.3);
DisturbanceProfile canonical_step_profile(double dt = 1e-3, double horizon = 60.0);

/// Random-phase multisine up to max_frequency plus a slow random walk,
/// normalized so that max |signal| equals peak on each channel.
struct ContinuousProfileSpec {
  double peak = 0.3;
  double max_frequency = 0.1;  ///< Hz
  int components = 20;
  double walk_scale = 0.05;
  bool include_wind = true;
};

DisturbanceProfile make_continuous_profile(const ContinuousProfileSpec& shape,
                                           std::uint64_t seed, double horizon,
                                           double dt = 1e-3);

/// CSV with header t,P_li,P_lr,P_w and full-precision values.
void write_profile_csv(std::ostream& os, const DisturbanceProfile& p);
DisturbanceProfile read_profile_csv(std::istream& is);
DisturbanceProfile read_profile_csv_file(const std::string& path);

/// Zero-mean Gaussian noise standard deviations. input_std is empty or has
/// one entry per reference channel; measurement_std is keyed by the plant
/// output a controller measures, and unlisted measurements are noiseless.
struct NoiseSpec {
  VectorXd input_std;
  std::map<std::string, double> measurement_std;
  std::uint64_t seed = 1;

  bool active() const;
  void validate(int num_references) const;
};

struct SimulationOptions {
  double dt = 1e-3;
  double horizon = 60.0;
  double max_step = 1e-3;        ///< fastest model time constant
  double blowup_threshold = 1e6;
};

struct SignalMetrics {
  double max_abs = 0.0;
  double rms = 0.0;
};

/// Metrics in per unit. Frequencies convert to Hz through the nominal
/// frequency when reported.
struct Metrics {
  std::map<std::string, SignalMetrics> signals;
  double freq_max_total = 0.0;  ///< |fi|max + |fr|max
  double freq_rms_total = 0.0;  ///< rms(fi) + rms(fr)
  double gen_max_total = 0.0;   ///< |Pgi|max + |Pgr|max
  double gen_rms_total = 0.0;   ///< rms(Pgi) + rms(Pgr)
  double vdc_max_percent = 0.0; ///< max(|Vdcr|, |Vdci|) in percent of nominal

  const SignalMetrics& at(const std::string& signal) const;
};

constexpr double kNominalFrequencyHz = 60.0;

struct ScenarioResult {
  std::string name;
  int case_id = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;

  std::vector<double> t;
  std::vector<std::string> state_labels;      ///< plant states
  std::vector<std::string> output_labels;     ///< plant outputs
  std::vector<std::string> reference_labels;  ///< applied references
  std::vector<std::string> controller_labels; ///< controller states
  MatrixXd states;      ///< one row per sample
  MatrixXd outputs;
  MatrixXd references;
  MatrixXd controller;
  Metrics metrics;

  int output_column(const std::string& name) const;
  VectorXd output(const std::string& name) const;
};

/// Classical RK4 integration of plant and controller with zero-order-hold
/// disturbances and noise. The plant inputs are num_references references
/// followed by the disturbance channels of the profile.
/// Throws StepTooLarge, UnstableBlowup, DimensionMismatch.
ScenarioResult integrate(const StateSpaceModel& plant, const LinearController& ctrl,
                         const DisturbanceProfile& profile, const NoiseSpec& noise,
                         const SimulationOptions& options,
                         const std::optional<VectorXd>& x0 = std::nullopt,
                         const std::optional<VectorXd>& xc0 = std::nullopt);

/// Per-signal max and RMS over every sample plus the tabulated totals.
Metrics compute_metrics(const ScenarioResult& result);

/// Maximum absolute value and root mean square of a sampled signal.
SignalMetrics signal_metrics(const VectorXd& v);

/// CSV with t, the plant states, the plant outputs that are not states,
/// the references and the controller states; every `decimate`-th sample.
void write_trajectory_csv(std::ostream& os, const ScenarioResult& r, int decimate = 1);

/// Sensitivity variants of the case studies.
enum class CaseVariant { kDefault, kWeightsX10, kNoDroop, kNoDroopNoInertia };

std::string to_string(CaseVariant v);
CaseVariant case_variant_from_string(const std::string& s);

/// A synthesized strategy ready for simulation. The closed loop is checked
/// Hurwitz at construction.
struct CaseModel {
  int case_id = 0;
  CaseVariant variant = CaseVariant::kDefault;
  StateSpaceModel plant;  ///< augmented plant for case 1
  LinearController controller;
  std::optional<LqgDesign> lqg;
  double spectral_abscissa = 0.0;

  std::string name() const;
};

/// Case 1: LQG with both-side PFC; case 2: PI with both-side PFC; case 3:
/// PI with inverter-side PFC only. Throws UnknownCase, NotStabilizing.
CaseModel build_case(const SystemConfig& cfg, int case_id,
                     CaseVariant variant = CaseVariant::kDefault);

ScenarioResult run_case(const CaseModel& c, const DisturbanceProfile& profile,
                        const NoiseSpec& noise, const SimulationOptions& options);

struct ScenarioSpec {
  int case_id = 1;
  CaseVariant variant = CaseVariant::kDefault;
  ProfileKind profile = ProfileKind::kStep;
};

struct CaseMatrixConfig {
  SystemConfig system;
  std::vector<ScenarioSpec> scenarios;
  std::vector<StepEvent> steps = canonical_step_events();
  ContinuousProfileSpec continuous;
  std::string imported_profile;  ///< CSV path used for kImported
  NoiseSpec noise;
  double dt = 1e-3;
  double step_horizon = 60.0;
  double continuous_horizon = 200.0;
  std::uint64_t seed = 1;
};

struct ScenarioOutcome {
  ScenarioSpec scenario;
  std::optional<ScenarioResult> result;
  std::string error;
};

/// Runs every scenario on shared profiles and seeds; a failing scenario is
/// recorded and the remaining ones still run.
std::vector<ScenarioOutcome> run_case_matrix(const CaseMatrixConfig& cfg);

/// Structured-text comparison of the metrics, frequencies in Hz.
void write_metrics_report(std::ostream& os, const std::vector<ScenarioOutcome>& outcomes);

/// Controller with no states and no outputs feeding the references.
LinearController zero_controller();

struct SignalDiscrepancy {
  std::string signal;
  double peak = 0.0;         ///< peak |deviation| of the simplified model
  double discrepancy = 0.0;  ///< max |simplified - original| / peak
  bool pass = false;
};

struct CrossValidation {
  std::vector<SignalDiscrepancy> signals;
  double threshold = 0.05;
  bool pass() const;
};

/// Sustained step on the inverter-side load applied to the PFC plants
/// built with the simplified and the original DC-link forms, with the
/// supplementary references held at zero.
CrossValidation cross_validate(const SystemConfig& cfg, double magnitude = 0.3,
                               double step_time = 5.0, double horizon = 20.0,
                               double dt = 1e-3, double threshold = 0.05);

/// Relative reduction 1 - a / b.
double reduction(double a, double b);

}  // namespace hvdc
