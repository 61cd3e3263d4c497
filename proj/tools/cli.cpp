#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hvdc/config.hpp"
#include "hvdc/errors.hpp"
#include "hvdc/modal_analysis.hpp"
#include "hvdc/simulation.hpp"

namespace hvdc::cli {
namespace {

class OutputError : public Error { using Error::Error; };

/// Flag values that override the loaded configuration.
struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<int> case_id;
  std::optional<std::string> variant;
  std::optional<std::string> profile;
  std::optional<std::string> param;
  std::vector<double> range;
  std::optional<int> points;
  std::optional<int> decimate;
};

ScenarioConfig resolve(const Overrides& o) {
  ScenarioConfig c = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
  if (o.out) c.output_dir = *o.out;
  if (o.seed) {
    c.run.seed = *o.seed;
    c.run.noise.seed = *o.seed;
  }
  if (o.dt) c.run.dt = *o.dt;
  if (o.case_id) c.case_id = *o.case_id;
  try {
    if (o.variant) c.variant = case_variant_from_string(*o.variant);
    if (o.profile) c.profile = profile_kind_from_string(*o.profile);
  } catch (const Error& e) {
    throw ConfigError(e.what(), o.variant ? "--variant" : "--profile");
  }
  if (o.horizon) {
    if (c.profile == ProfileKind::kContinuous) {
      c.run.continuous_horizon = *o.horizon;
    } else {
      c.run.step_horizon = *o.horizon;
    }
  }
  if (o.param) {
    if (*o.param != c.sweep.parameter) c.sweep.range.reset();
    c.sweep.parameter = *o.param;
  }
  if (!o.range.empty()) {
    if (o.range.size() != 2) throw ConfigError("--range needs two values", "--range");
    c.sweep.range = std::make_pair(o.range[0], o.range[1]);
  }
  if (o.points) c.sweep.points = *o.points;
  if (o.decimate) c.decimate = *o.decimate;
  c.validate();
  return c;
}

std::filesystem::path prepare_output(const ScenarioConfig& c) {
  const std::filesystem::path dir(c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw OutputError(fmt::format("cannot create output directory '{}': {}", dir.string(),
                                  ec.message()));
  }
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OutputError(fmt::format("cannot write '{}'", path.string()));
  return f;
}

void finish_output(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw OutputError(fmt::format("write to '{}' failed", path.string()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f = open_output(path);
  f << text;
  finish_output(f, path);
}

void write_resolved(const std::filesystem::path& dir, const ScenarioConfig& c) {
  write_text(dir / "resolved_config.yaml", emit_config(c));
}

std::string matrix_csv(const MatrixXd& M, const std::vector<std::string>& cols,
                       const std::vector<std::string>& rows) {
  std::string s = "row";
  for (const auto& c : cols) s += "," + c;
  s += "\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    s += rows.empty() ? std::to_string(i) : rows[i];
    for (Eigen::Index j = 0; j < M.cols(); ++j) s += fmt::format(",{:.17g}", M(i, j));
    s += "\n";
  }
  return s;
}

std::string modes_csv(const ModeSet& ms) {
  std::string s = "re,im,damping,kind\n";
  for (std::size_t k = 0; k < ms.eigenvalues.size(); ++k) {
    s += fmt::format("{:.17g},{:.17g},{:.17g},{}\n", ms.eigenvalues[k].real(),
                     ms.eigenvalues[k].imag(), ms.damping_ratios[k], to_string(ms.kinds[k]));
  }
  return s;
}

int cmd_validate(const ScenarioConfig& c, std::ostream& out) {
  const auto dir = prepare_output(c);
  write_resolved(dir, c);
  const CrossValidation cv = cross_validate(c.run.system, 0.3, 5.0, 20.0, c.run.dt);
  std::string report = fmt::format("cross_validation:\n  threshold: {:.6g}\n  signals:\n",
                                   cv.threshold);
  for (const auto& s : cv.signals) {
    report += fmt::format("    - signal: {}\n      peak_pu: {:.6g}\n      discrepancy: {:.6g}\n"
                          "      status: {}\n",
                          s.signal, s.peak, s.discrepancy, s.pass ? "pass" : "fail");
  }
  report += fmt::format("  status: {}\n", cv.pass() ? "pass" : "fail");
  write_text(dir / "validate.txt", report);
  out << report;
  return cv.pass() ? kOk : kModelMismatch;
}

int cmd_synthesize(const ScenarioConfig& c, std::ostream& out) {
  const auto dir = prepare_output(c);
  write_resolved(dir, c);
  const SystemConfig& sys = c.run.system;
  const AugmentedModel aug = augment(build_plant(sys));
  const LqgDesign d = design_lqg(aug, sys.weights);
  const ModeSet control = modes(MatrixXd(aug.A() - aug.Br() * d.K));
  const ModeSet filter = modes(MatrixXd(aug.A() - d.L * aug.Cm()));
  const auto& refs = plant_input_labels();
  const std::vector<std::string> ref_labels(refs.begin(), refs.begin() + PlantModel::kNumReferences);
  write_text(dir / "gain_K.csv", matrix_csv(d.K, aug.sys.state_labels, ref_labels));
  write_text(dir / "gain_L.csv", matrix_csv(d.L, d.controller.input_labels, aug.sys.state_labels));
  write_text(dir / "control_modes.csv", modes_csv(control));
  write_text(dir / "estimator_modes.csv", modes_csv(filter));
  std::string report = "synthesis:\n";
  report += fmt::format("  dc_link: {}\n  states: {}\n", to_string(sys.form), aug.sys.num_states());
  report += fmt::format("  control_riccati_residual: {:.3e}\n", d.control.residual);
  report += fmt::format("  filter_riccati_residual: {:.3e}\n", d.filter.residual);
  report += fmt::format("  control_subspace_condition: {:.3e}\n", d.control.subspace_condition);
  report += fmt::format("  filter_subspace_condition: {:.3e}\n", d.filter.subspace_condition);
  report += fmt::format("  control_spectral_abscissa: {:.6g}\n", control.spectral_abscissa());
  report += fmt::format("  estimator_spectral_abscissa: {:.6g}\n", filter.spectral_abscissa());
  const auto dom = control.dominant_eigenvalue();
  report += fmt::format("  dominant_pole: [{:.6g}, {:.6g}]\n", dom.real(), dom.imag());
  report += fmt::format("  min_damping: {:.6g}\n", control.min_damping());
  write_text(dir / "synthesis.txt", report);
  out << report;
  return kOk;
}

int cmd_eigs(const ScenarioConfig& c, std::ostream& out) {
  const auto dir = prepare_output(c);
  write_resolved(dir, c);
  const CaseModel cm = build_case(c.run.system, c.case_id, c.variant);
  const StateSpaceModel cl = close_loop(cm.plant, PlantModel::kNumReferences, cm.controller);
  const ModeSet ms = modes(cl);
  write_text(dir / fmt::format("{}_eigs.csv", cm.name()), modes_csv(ms));
  const auto dom = ms.dominant_eigenvalue();
  out << fmt::format("{}: {} modes, abscissa {:.6g}, dominant [{:.6g}, {:.6g}], min damping "
                     "{:.6g}\n",
                     cm.name(), ms.eigenvalues.size(), ms.spectral_abscissa(), dom.real(),
                     dom.imag(), ms.min_damping());
  return ms.hurwitz() ? kOk : kNumericalError;
}

int cmd_root_locus(const ScenarioConfig& c, std::ostream& out) {
  const auto dir = prepare_output(c);
  write_resolved(dir, c);
  const auto [lo, hi] = c.sweep.range ? *c.sweep.range : default_sweep_range(c.sweep.parameter);
  const SweepResult sw = root_locus(c.run.system, c.sweep.parameter, lo, hi, c.sweep.points);
  const auto path = dir / fmt::format("locus_{}.csv", c.sweep.parameter);
  std::ofstream f = open_output(path);
  write_locus_csv(f, sw);
  finish_output(f, path);
  std::string summary = "param_value,spectral_abscissa,min_damping,dominant_real_pole,status\n";
  int failed = 0;
  for (std::size_t k = 0; k < sw.values.size(); ++k) {
    if (!sw.ok(k)) {
      ++failed;
      summary += fmt::format("{:.17g},,,,\"{}\"\n", sw.values[k], sw.errors[k]);
      continue;
    }
    const ModeSet& ms = sw.modes[k];
    const auto dr = ms.dominant_real_pole();
    summary += fmt::format("{:.17g},{:.17g},{:.17g},{},ok\n", sw.values[k], ms.spectral_abscissa(),
                           ms.min_damping(), dr ? fmt::format("{:.17g}", *dr) : "");
  }
  write_text(dir / fmt::format("locus_{}_summary.csv", c.sweep.parameter), summary);
  out << fmt::format("{} sweep over [{:.6g}, {:.6g}]: {} points, {} failed\n",
                     c.sweep.parameter, lo, hi, sw.values.size(), failed);
  return failed == 0 ? kOk : kModelMismatch;
}

int run_scenarios(const ScenarioConfig& c, const std::vector<ScenarioSpec>& specs,
                  std::ostream& out) {
  const auto dir = prepare_output(c);
  write_resolved(dir, c);
  CaseMatrixConfig m = c.run;
  m.scenarios = specs;
  const auto outcomes = run_case_matrix(m);
  int failed = 0;
  for (const auto& o : outcomes) {
    if (!o.result) {
      ++failed;
      out << fmt::format("case{}_{} {}: failed: {}\n", o.scenario.case_id, to_string(o.scenario.variant),
                         to_string(o.scenario.profile), o.error);
      continue;
    }
    const auto path = dir / fmt::format("{}.csv", o.result->name);
    std::ofstream f = open_output(path);
    write_trajectory_csv(f, *o.result, c.decimate);
    finish_output(f, path);
    const Metrics& mt = o.result->metrics;
    out << fmt::format("{}: max f total {:.4g} Hz, rms f total {:.4g} Hz, max Vdc {:.4g} %\n",
                       o.result->name,
                       kNominalFrequencyHz * mt.freq_max_total,
                       kNominalFrequencyHz * mt.freq_rms_total, mt.vdc_max_percent);
  }
  std::ostringstream report;
  write_metrics_report(report, outcomes);
  write_text(dir / "metrics.yaml", report.str());
  return failed == 0 ? kOk : kModelMismatch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency regulation studies for a two-grid LCC-HVDC system", "hvdc_lab"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config_path, "YAML scenario configuration")
        ->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "Output directory (created if missing)");
    s->add_option("--seed", o.seed, "Seed of the continuous profile and the noise");
    s->add_option("--dt", o.dt, "Integration step (s)");
  };
  auto scenario = [&](CLI::App* s) {
    s->add_option("--case", o.case_id, "Strategy: 1 LQG, 2 PI, 3 PI with inverter-side PFC");
    s->add_option("--variant", o.variant, "default, weights_x10, no_droop, no_droop_no_inertia");
    s->add_option("--profile", o.profile, "step, continuous or imported");
    s->add_option("--horizon", o.horizon, "Simulated time of the selected profile (s)");
    s->add_option("--decimate", o.decimate, "Write every n-th sample");
  };

  CLI::App* validate = app.add_subcommand("validate", "Cross-validate the DC-link model forms");
  common(validate);
  CLI::App* synthesize = app.add_subcommand("synthesize", "LQG gains, residuals and spectra");
  common(synthesize);
  CLI::App* eigs = app.add_subcommand("eigs", "Closed-loop spectrum of a strategy");
  common(eigs);
  scenario(eigs);
  CLI::App* locus = app.add_subcommand("root-locus", "Re-synthesize over a parameter sweep");
  common(locus);
  locus->add_option("--param", o.param, "Swept parameter");
  locus->add_option("--range", o.range, "Lower and upper sweep bound")->expected(2);
  locus->add_option("--points", o.points, "Logarithmically spaced points");
  CLI::App* simulate = app.add_subcommand("simulate", "Time-domain run of one strategy");
  common(simulate);
  scenario(simulate);
  CLI::App* matrix = app.add_subcommand("case-matrix", "Run and compare every listed scenario");
  common(matrix);
  matrix->add_option("--horizon", o.horizon, "Step-profile horizon (s)");
  matrix->add_option("--decimate", o.decimate, "Write every n-th sample");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    const ScenarioConfig c = resolve(o);
    if (validate->parsed()) return cmd_validate(c, out);
    if (synthesize->parsed()) return cmd_synthesize(c, out);
    if (eigs->parsed()) return cmd_eigs(c, out);
    if (locus->parsed()) return cmd_root_locus(c, out);
    if (simulate->parsed()) return run_scenarios(c, {{c.case_id, c.variant, c.profile}}, out);
    if (matrix->parsed()) return run_scenarios(c, c.matrix, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidParameter& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnknownCase& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kConfigError;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kOutputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kNumericalError;
  }
  return kConfigError;
}

}  // namespace hvdc::cli
