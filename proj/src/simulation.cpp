#include "hvdc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "hvdc/errors.hpp"

namespace hvdc {
namespace {

long long steps_for(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidParameter("horizon must be nonnegative");
  }
  constexpr double kMaxSteps = 1e8;
  if (horizon / dt > kMaxSteps) {
    throw InvalidParameter(fmt::format("{:.3g} steps exceed the limit of {:.0e}", horizon / dt,
                                       kMaxSteps));
  }
  return std::llround(horizon / dt);
}

std::vector<double> time_grid(long long N, double dt) {
  std::vector<double> t(N + 1);
  for (long long k = 0; k <= N; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

std::vector<double>& channel(DisturbanceProfile& p, int c) {
  switch (c) {
    case 0: return p.P_li;
    case 1: return p.P_lr;
    case 2: return p.P_w;
  }
  throw InvalidParameter(fmt::format("disturbance channel {} out of range", c));
}

std::vector<double> split_csv(const std::string& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t next = std::min(line.find(',', pos), line.size());
    const std::string cell = line.substr(pos, next - pos);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) {
      throw FileFormat(fmt::format("cannot parse '{}' as a number", cell));
    }
    out.push_back(v);
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::kStep: return "step";
    case ProfileKind::kContinuous: return "continuous";
    case ProfileKind::kImported: return "imported";
  }
  return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "step") return ProfileKind::kStep;
  if (s == "continuous") return ProfileKind::kContinuous;
  if (s == "imported") return ProfileKind::kImported;
  throw InvalidParameter(fmt::format("unknown profile kind '{}'", s));
}

void DisturbanceProfile::validate() const {
  if (t.empty()) throw FileFormat("profile is empty");
  if (P_li.size() != t.size() || P_lr.size() != t.size() || P_w.size() != t.size()) {
    throw FileFormat("profile channels have inconsistent lengths");
  }
  if (!(dt > 0.0)) throw FileFormat("profile step must be positive");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t[k]) || !std::isfinite(P_li[k]) || !std::isfinite(P_lr[k]) ||
        !std::isfinite(P_w[k])) {
      throw FileFormat(fmt::format("non-finite profile value at sample {}", k));
    }
    const double expected = t.front() + static_cast<double>(k) * dt;
    if (std::abs(t[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw FileFormat(fmt::format("profile grid is not uniform at sample {}", k));
    }
  }
}

DisturbanceProfile make_step_profile(const std::vector<StepEvent>& events, double dt,
                                     double horizon) {
  const long long N = steps_for(horizon, dt);
  DisturbanceProfile p;
  p.dt = dt;
  p.t = time_grid(N, dt);
  p.P_li.assign(N + 1, 0.0);
  p.P_lr.assign(N + 1, 0.0);
  p.P_w.assign(N + 1, 0.0);
  p.provenance = ProfileKind::kStep;
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& e : events) {
    if (e.time < last) throw InvalidParameter("step times must be nondecreasing");
    last = e.time;
    auto& ch = channel(p, e.channel);
    const long long ks = std::llround(e.time / dt);
    const long long ke = e.hold > 0.0 ? std::llround((e.time + e.hold) / dt) : N + 1;
    for (long long k = std::max(0LL, ks); k < std::min(ke, N + 1); ++k) ch[k] += e.magnitude;
  }
  return p;
}

std::vector<StepEvent> canonical_step_events(double magnitude) {
  return {{0, 5.0, magnitude, 15.0}, {1, 35.0, magnitude, 15.0}};
}

DisturbanceProfile canonical_step_profile(double dt, double horizon) {
  return make_step_profile(canonical_step_events(), dt, horizon);
}

DisturbanceProfile make_continuous_profile(const ContinuousProfileSpec& shape,
                                           std::uint64_t seed, double horizon,
                                           double dt) {
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  if (!(shape.peak >= 0.0) || !(shape.max_frequency > 0.0) || shape.components < 1 ||
      !(shape.walk_scale >= 0.0)) {
    throw InvalidParameter("invalid continuous profile specification");
  }
  const long long N = steps_for(horizon, dt);
  DisturbanceProfile p;
  p.dt = dt;
  p.t = time_grid(N, dt);
  p.provenance = ProfileKind::kContinuous;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  for (int c = 0; c < 3; ++c) {
    auto& s = channel(p, c);
    s.assign(N + 1, 0.0);
    if (c == 2 && !shape.include_wind) continue;
    for (int k = 1; k <= shape.components; ++k) {
      const double f = shape.max_frequency * k / shape.components;
      const double a = normal(rng) / std::sqrt(static_cast<double>(k));
      const double ph = phase(rng);
      for (long long i = 0; i <= N; ++i) {
        s[i] += a * std::sin(2.0 * std::numbers::pi * f * p.t[i] + ph);
      }
    }
    std::vector<double> walk(N + 1);
    double acc = 0.0, mean = 0.0;
    for (long long i = 0; i <= N; ++i) {
      acc += normal(rng) * std::sqrt(dt) * shape.walk_scale;
      walk[i] = acc;
      mean += acc;
    }
    mean /= static_cast<double>(N + 1);
    double peak = 0.0;
    for (long long i = 0; i <= N; ++i) {
      s[i] += walk[i] - mean;
      peak = std::max(peak, std::abs(s[i]));
    }
    if (peak > 0.0) {
      for (auto& v : s) v *= shape.peak / peak;
    }
  }
  return p;
}

void write_profile_csv(std::ostream& os, const DisturbanceProfile& p) {
  p.validate();
  os << "t,P_li,P_lr,P_w\n";
  for (std::size_t k = 0; k < p.size(); ++k) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", p.t[k], p.P_li[k], p.P_lr[k],
                      p.P_w[k]);
  }
}

DisturbanceProfile read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FileFormat("profile CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,P_li,P_lr,P_w") {
    throw FileFormat(fmt::format("unexpected profile header '{}'", line));
  }
  DisturbanceProfile p;
  p.provenance = ProfileKind::kImported;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> v;
    try {
      v = split_csv(line);
    } catch (const FileFormat& e) {
      throw FileFormat(fmt::format("line {}: {}", lineno, e.what()));
    }
    if (v.size() != 4) {
      throw FileFormat(fmt::format("line {}: expected 4 columns, got {}", lineno, v.size()));
    }
    p.t.push_back(v[0]);
    p.P_li.push_back(v[1]);
    p.P_lr.push_back(v[2]);
    p.P_w.push_back(v[3]);
  }
  if (p.t.size() < 2) throw FileFormat("profile needs at least two samples");
  p.dt = p.t[1] - p.t[0];
  p.validate();
  return p;
}

DisturbanceProfile read_profile_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FileFormat(fmt::format("cannot open profile '{}'", path));
  return read_profile_csv(f);
}

bool NoiseSpec::active() const {
  if ((input_std.array() > 0.0).any()) return true;
  return std::any_of(measurement_std.begin(), measurement_std.end(),
                     [](const auto& kv) { return kv.second > 0.0; });
}

void NoiseSpec::validate(int num_references) const {
  if (input_std.size() != 0 && input_std.size() != num_references) {
    throw DimensionMismatch(fmt::format("input noise needs {} entries", num_references));
  }
  if (!input_std.allFinite() || (input_std.array() < 0.0).any()) {
    throw InvalidParameter("noise standard deviations must be nonnegative");
  }
  for (const auto& [k, v] : measurement_std) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidParameter(fmt::format("noise standard deviation of {} must be nonnegative", k));
    }
  }
}

const SignalMetrics& Metrics::at(const std::string& signal) const {
  auto it = signals.find(signal);
  if (it == signals.end()) throw InvalidParameter(fmt::format("no metrics for {}", signal));
  return it->second;
}

int ScenarioResult::output_column(const std::string& name) const {
  auto it = std::find(output_labels.begin(), output_labels.end(), name);
  if (it == output_labels.end()) throw InvalidParameter(fmt::format("no output named {}", name));
  return static_cast<int>(it - output_labels.begin());
}

VectorXd ScenarioResult::output(const std::string& name) const {
  return outputs.col(output_column(name));
}

ScenarioResult integrate(const StateSpaceModel& plant, const LinearController& ctrl,
                         const DisturbanceProfile& profile, const NoiseSpec& noise,
                         const SimulationOptions& opt, const std::optional<VectorXd>& x0,
                         const std::optional<VectorXd>& xc0) {
  constexpr int nr = PlantModel::kNumReferences;
  if (opt.dt > opt.max_step * (1.0 + 1e-12)) {
    throw StepTooLarge(fmt::format("step {} s exceeds the fastest time constant {} s",
                                   opt.dt, opt.max_step));
  }
  const long long N = steps_for(opt.horizon, opt.dt);
  profile.validate();
  const double ratio = profile.dt / opt.dt;
  const long long stride = std::llround(ratio);
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio) {
    throw InvalidParameter("profile step must be an integer multiple of the integration step");
  }
  if (static_cast<long long>(profile.size()) <= N / stride) {
    throw InvalidParameter("profile is shorter than the horizon");
  }
  noise.validate(nr);
  if (plant.num_inputs() != nr + 2) {
    throw DimensionMismatch("plant must have four references and two disturbances");
  }

  const StateSpaceModel cl = close_loop(plant, nr, ctrl, true);
  const int n = plant.num_states();
  const int nc = static_cast<int>(ctrl.Ac.rows());
  const int nz = n + nc, nu = cl.num_inputs();
  const int ny = static_cast<int>(ctrl.input_labels.size());
  const int q = plant.num_outputs();
  constexpr double kMaxStoredValues = 5e8;
  const double stored = static_cast<double>(N + 1) * (n + q + nr + nc);
  if (stored > kMaxStoredValues) {
    throw InvalidParameter(fmt::format(
        "trajectory of {} samples needs {:.3g} GB; shorten the horizon or raise dt", N + 1,
        stored * sizeof(double) / 1e9));
  }

  VectorXd z = VectorXd::Zero(nz);
  if (x0) {
    if (x0->size() != n) throw DimensionMismatch("initial plant state has the wrong size");
    z.head(n) = *x0;
  }
  if (xc0) {
    if (xc0->size() != nc) throw DimensionMismatch("initial controller state has the wrong size");
    z.tail(nc) = *xc0;
  }

  VectorXd in_std = VectorXd::Zero(nr), meas_std = VectorXd::Zero(ny);
  if (noise.input_std.size() == nr) in_std = noise.input_std;
  for (int j = 0; j < ny; ++j) {
    auto it = noise.measurement_std.find(ctrl.input_labels[j]);
    if (it != noise.measurement_std.end()) meas_std(j) = it->second;
  }
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ScenarioResult r;
  r.dt = opt.dt;
  r.seed = noise.seed;
  r.state_labels = plant.state_labels;
  r.output_labels = plant.output_labels;
  r.reference_labels.assign(plant.input_labels.begin(), plant.input_labels.begin() + nr);
  r.controller_labels = ctrl.state_labels;
  r.t = time_grid(N, opt.dt);
  r.states.resize(N + 1, n);
  r.outputs.resize(N + 1, q);
  r.references.resize(N + 1, nr);
  r.controller.resize(N + 1, nc);

  const MatrixXd& A = cl.A;
  const MatrixXd& B = cl.B;
  const MatrixXd& C = cl.C;
  const MatrixXd& D = cl.D;
  VectorXd u = VectorXd::Zero(nu);
  const double h = opt.dt;
  for (long long k = 0; k <= N; ++k) {
    u.head(2) = profile.w(static_cast<std::size_t>(k / stride));
    for (int i = 0; i < nr; ++i) u(2 + i) = in_std(i) > 0.0 ? in_std(i) * normal(rng) : 0.0;
    for (int j = 0; j < ny; ++j) {
      u(2 + nr + j) = meas_std(j) > 0.0 ? meas_std(j) * normal(rng) : 0.0;
    }
    const VectorXd y = C * z + D * u;
    r.states.row(k) = z.head(n).transpose();
    r.controller.row(k) = z.tail(nc).transpose();
    r.outputs.row(k) = y.head(q).transpose();
    r.references.row(k) = y.tail(nr).transpose();
    if (k == N) break;

    const VectorXd Bu = B * u;
    const VectorXd k1 = A * z + Bu;
    const VectorXd k2 = A * (z + 0.5 * h * k1) + Bu;
    const VectorXd k3 = A * (z + 0.5 * h * k2) + Bu;
    const VectorXd k4 = A * (z + h * k3) + Bu;
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    Eigen::Index worst = 0;
    const double mag = z.cwiseAbs().maxCoeff(&worst);
    if (!(mag <= opt.blowup_threshold)) {
      const std::string& label = cl.state_labels[worst];
      throw UnstableBlowup(fmt::format("state {} reached {:.3g} at t = {:.6g} s", label,
                                       z(worst), static_cast<double>(k + 1) * h));
    }
  }
  r.metrics = compute_metrics(r);
  return r;
}

SignalMetrics signal_metrics(const VectorXd& v) {
  SignalMetrics m;
  if (v.size() == 0) return m;
  m.max_abs = v.cwiseAbs().maxCoeff();
  m.rms = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
  return m;
}

Metrics compute_metrics(const ScenarioResult& r) {
  if (r.t.empty()) throw InvalidParameter("empty trajectories");
  Metrics m;
  for (std::size_t j = 0; j < r.output_labels.size(); ++j) {
    m.signals[r.output_labels[j]] = signal_metrics(r.outputs.col(static_cast<Eigen::Index>(j)));
  }
  auto get = [&](const char* s) {
    auto it = m.signals.find(s);
    return it == m.signals.end() ? SignalMetrics{} : it->second;
  };
  m.freq_max_total = get("fi").max_abs + get("fr").max_abs;
  m.freq_rms_total = get("fi").rms + get("fr").rms;
  m.gen_max_total = get("Pgi").max_abs + get("Pgr").max_abs;
  m.gen_rms_total = get("Pgi").rms + get("Pgr").rms;
  m.vdc_max_percent = 100.0 * std::max(get("Vdcr").max_abs, get("Vdci").max_abs);
  return m;
}

void write_trajectory_csv(std::ostream& os, const ScenarioResult& r, int decimate) {
  if (decimate < 1) throw InvalidParameter("decimation must be at least 1");
  std::vector<int> out_cols;
  for (std::size_t j = 0; j < r.output_labels.size(); ++j) {
    if (std::find(r.state_labels.begin(), r.state_labels.end(), r.output_labels[j]) ==
        r.state_labels.end()) {
      out_cols.push_back(static_cast<int>(j));
    }
  }
  os << "t";
  for (const auto& l : r.state_labels) os << ',' << l;
  for (int j : out_cols) os << ',' << r.output_labels[j];
  for (const auto& l : r.reference_labels) os << ',' << l;
  for (const auto& l : r.controller_labels) os << ',' << l;
  os << '\n';
  fmt::memory_buffer buf;
  for (std::size_t k = 0; k < r.t.size(); k += static_cast<std::size_t>(decimate)) {
    buf.clear();
    const auto row = static_cast<Eigen::Index>(k);
    fmt::format_to(std::back_inserter(buf), "{:.17g}", r.t[k]);
    for (Eigen::Index j = 0; j < r.states.cols(); ++j) {
      fmt::format_to(std::back_inserter(buf), ",{:.17g}", r.states(row, j));
    }
    for (int j : out_cols) fmt::format_to(std::back_inserter(buf), ",{:.17g}", r.outputs(row, j));
    for (Eigen::Index j = 0; j < r.references.cols(); ++j) {
      fmt::format_to(std::back_inserter(buf), ",{:.17g}", r.references(row, j));
    }
    for (Eigen::Index j = 0; j < r.controller.cols(); ++j) {
      fmt::format_to(std::back_inserter(buf), ",{:.17g}", r.controller(row, j));
    }
    buf.push_back('\n');
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

std::string to_string(CaseVariant v) {
  switch (v) {
    case CaseVariant::kDefault: return "default";
    case CaseVariant::kWeightsX10: return "weights_x10";
    case CaseVariant::kNoDroop: return "no_droop";
    case CaseVariant::kNoDroopNoInertia: return "no_droop_no_inertia";
  }
  return "unknown";
}

CaseVariant case_variant_from_string(const std::string& s) {
  if (s == "default") return CaseVariant::kDefault;
  if (s == "weights_x10") return CaseVariant::kWeightsX10;
  if (s == "no_droop") return CaseVariant::kNoDroop;
  if (s == "no_droop_no_inertia") return CaseVariant::kNoDroopNoInertia;
  throw InvalidParameter(fmt::format("unknown case variant '{}'", s));
}

std::string CaseModel::name() const {
  return fmt::format("case{}_{}", case_id, to_string(variant));
}

CaseModel build_case(const SystemConfig& cfg, int case_id, CaseVariant variant) {
  SystemConfig c = cfg;
  switch (variant) {
    case CaseVariant::kDefault: break;
    case CaseVariant::kWeightsX10: c.weights.Q *= 10.0; break;
    case CaseVariant::kNoDroop: c.pfc.droop_enabled = false; break;
    case CaseVariant::kNoDroopNoInertia:
      c.pfc.droop_enabled = false;
      c.pfc.inertia_enabled = false;
      break;
  }
  CaseModel m;
  m.case_id = case_id;
  m.variant = variant;
  if (case_id == 1) {
    const AugmentedModel aug = augment(build_plant(c));
    m.lqg = design_lqg(aug, c.weights);
    m.plant = aug.sys;
    m.controller = m.lqg->controller;
  } else if (case_id == 2) {
    m.plant = build_plant(c).sys;
    m.controller = realize_pi(build_pi_controller(2, c.pi, c.pi_signal));
  } else if (case_id == 3) {
    m.plant = build_plant(c, inverter_only_pfc(c.pfc), c.form).sys;
    m.controller = realize_pi(build_pi_controller(3, c.pi, c.pi_signal));
  } else {
    throw UnknownCase(fmt::format("unknown case {}", case_id));
  }
  const StateSpaceModel cl = close_loop(m.plant, PlantModel::kNumReferences, m.controller);
  m.spectral_abscissa = hvdc::spectral_abscissa(cl.A);
  if (!(m.spectral_abscissa < 0.0)) {
    throw NotStabilizing(fmt::format("{} closed loop is not Hurwitz (abscissa {})", m.name(),
                                     m.spectral_abscissa));
  }
  return m;
}

ScenarioResult run_case(const CaseModel& c, const DisturbanceProfile& profile,
                        const NoiseSpec& noise, const SimulationOptions& options) {
  ScenarioResult r = integrate(c.plant, c.controller, profile, noise, options);
  r.case_id = c.case_id;
  r.name = fmt::format("{}_{}", c.name(), to_string(profile.provenance));
  return r;
}

std::vector<ScenarioOutcome> run_case_matrix(const CaseMatrixConfig& cfg) {
  std::vector<ScenarioOutcome> out;
  std::optional<DisturbanceProfile> step, cont, imported;
  for (const auto& s : cfg.scenarios) {
    ScenarioOutcome o;
    o.scenario = s;
    try {
      const DisturbanceProfile* prof = nullptr;
      double horizon = 0.0;
      switch (s.profile) {
        case ProfileKind::kStep:
          if (!step) step = make_step_profile(cfg.steps, cfg.dt, cfg.step_horizon);
          prof = &*step;
          horizon = cfg.step_horizon;
          break;
        case ProfileKind::kContinuous:
          if (!cont) {
            cont = make_continuous_profile(cfg.continuous, cfg.seed, cfg.continuous_horizon,
                                           cfg.dt);
          }
          prof = &*cont;
          horizon = cfg.continuous_horizon;
          break;
        case ProfileKind::kImported:
          if (!imported) imported = read_profile_csv_file(cfg.imported_profile);
          prof = &*imported;
          horizon = prof->t.back() - prof->t.front();
          break;
      }
      SimulationOptions opt;
      opt.dt = cfg.dt;
      opt.horizon = horizon;
      opt.max_step = cfg.system.hvdc.T_k;
      const CaseModel cm = build_case(cfg.system, s.case_id, s.variant);
      o.result = run_case(cm, *prof, cfg.noise, opt);
    } catch (const Error& e) {
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

void write_metrics_report(std::ostream& os, const std::vector<ScenarioOutcome>& outcomes) {
  const double hz = kNominalFrequencyHz;
  os << "scenarios:\n";
  for (const auto& o : outcomes) {
    os << fmt::format("  - case: {}\n    variant: {}\n    profile: {}\n", o.scenario.case_id,
                      to_string(o.scenario.variant), to_string(o.scenario.profile));
    if (!o.result) {
      os << fmt::format("    status: failed\n    error: \"{}\"\n", o.error);
      continue;
    }
    const Metrics& m = o.result->metrics;
    auto sig = [&](const char* s) {
      auto it = m.signals.find(s);
      return it == m.signals.end() ? SignalMetrics{} : it->second;
    };
    os << "    status: ok\n";
    os << fmt::format("    seed: {}\n    dt: {:.17g}\n", o.result->seed, o.result->dt);
    os << "    max_frequency_deviation_hz:\n";
    os << fmt::format("      inverter: {:.6g}\n      rectifier: {:.6g}\n      total: {:.6g}\n",
                      hz * sig("fi").max_abs, hz * sig("fr").max_abs, hz * m.freq_max_total);
    os << fmt::format("    max_dc_voltage_deviation_percent: {:.6g}\n", m.vdc_max_percent);
    os << "    rms_frequency_deviation_hz:\n";
    os << fmt::format("      inverter: {:.6g}\n      rectifier: {:.6g}\n      total: {:.6g}\n",
                      hz * sig("fi").rms, hz * sig("fr").rms, hz * m.freq_rms_total);
    os << "    rms_generator_power_pu:\n";
    os << fmt::format("      inverter: {:.6g}\n      rectifier: {:.6g}\n      total: {:.6g}\n",
                      sig("Pgi").rms, sig("Pgr").rms, m.gen_rms_total);
  }
}

LinearController zero_controller() {
  constexpr int nr = PlantModel::kNumReferences;
  return LinearController{MatrixXd(0, 0), MatrixXd(0, 0), MatrixXd(nr, 0), MatrixXd(nr, 0),
                          {}, {}};
}

bool CrossValidation::pass() const {
  return std::all_of(signals.begin(), signals.end(), [](const auto& s) { return s.pass; });
}

CrossValidation cross_validate(const SystemConfig& cfg, double magnitude, double step_time,
                               double horizon, double dt, double threshold) {
  const DisturbanceProfile prof =
      make_step_profile({{0, step_time, magnitude, 0.0}}, dt, horizon);
  SimulationOptions opt;
  opt.dt = dt;
  opt.horizon = horizon;
  opt.max_step = cfg.hvdc.T_k;
  const NoiseSpec quiet;
  const ScenarioResult simp = integrate(build_plant(cfg, cfg.pfc, DcLinkForm::kSimplified).sys,
                                        zero_controller(), prof, quiet, opt);
  const ScenarioResult orig = integrate(build_plant(cfg, cfg.pfc, DcLinkForm::kOriginal).sys,
                                        zero_controller(), prof, quiet, opt);
  CrossValidation cv;
  cv.threshold = threshold;
  for (const char* s : {"Vdcr", "Vdci", "Idci", "Pdcr", "Pdci", "fi", "fr"}) {
    const VectorXd a = simp.output(s), b = orig.output(s);
    SignalDiscrepancy d;
    d.signal = s;
    d.peak = a.cwiseAbs().maxCoeff();
    d.discrepancy = d.peak > 0.0 ? (a - b).cwiseAbs().maxCoeff() / d.peak
                                 : (a - b).cwiseAbs().maxCoeff();
    d.pass = d.discrepancy <= threshold;
    cv.signals.push_back(d);
  }
  return cv;
}

double reduction(double a, double b) { return 1.0 - a / b; }

}  // namespace hvdc
