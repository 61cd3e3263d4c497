#include "hvdc/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "hvdc/errors.hpp"

namespace hvdc {
namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : -1; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& path, const std::string& msg) {
  const int line = line_of(n);
  throw ConfigError(fmt::format("{} (key '{}', line {})", msg, path, line), path, line);
}

double read_double(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected a number");
  const std::string& s = n.Scalar();
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    fail(n, path, fmt::format("'{}' is not a number", s));
  }
  return v;
}

long long read_integer(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected an integer");
  const std::string& s = n.Scalar();
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    fail(n, path, fmt::format("'{}' is not an integer", s));
  }
  return v;
}

bool read_bool(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected true or false");
  const std::string& s = n.Scalar();
  if (s == "true") return true;
  if (s == "false") return false;
  fail(n, path, fmt::format("'{}' is not true or false", s));
}

std::string read_string(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected a string");
  return n.Scalar();
}

VectorXd read_vector(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) fail(n, path, "expected a list of numbers");
  VectorXd v(static_cast<Eigen::Index>(n.size()));
  for (std::size_t k = 0; k < n.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = read_double(n[k], fmt::format("{}[{}]", path, k));
  }
  return v;
}

/// Reads the keys of one mapping and rejects any key it did not consume.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) fail(node_, path_.empty() ? "<root>" : path_, "expected a mapping");
  }

  template <class F>
  void field(const std::string& key, F&& fn) {
    known_.insert(key);
    const YAML::Node v = node_[key];
    if (v) fn(v, child(key));
  }

  void number(const std::string& key, double& out) {
    field(key, [&](const YAML::Node& v, const std::string& p) { out = read_double(v, p); });
  }
  void integer(const std::string& key, int& out) {
    field(key, [&](const YAML::Node& v, const std::string& p) {
      out = static_cast<int>(read_integer(v, p));
    });
  }
  void boolean(const std::string& key, bool& out) {
    field(key, [&](const YAML::Node& v, const std::string& p) { out = read_bool(v, p); });
  }
  void string(const std::string& key, std::string& out) {
    field(key, [&](const YAML::Node& v, const std::string& p) { out = read_string(v, p); });
  }
  void vector(const std::string& key, VectorXd& out) {
    field(key, [&](const YAML::Node& v, const std::string& p) { out = read_vector(v, p); });
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.Scalar();
      if (!known_.count(key)) fail(it->first, child(key), "unknown key");
    }
  }

 private:
  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> known_;
};

template <class E, class F>
E read_enum(const YAML::Node& n, const std::string& path, F&& from_string) {
  const std::string s = read_string(n, path);
  try {
    return from_string(s);
  } catch (const Error& e) {
    fail(n, path, e.what());
  }
}

OverlapPolicy overlap_from_string(const std::string& s) {
  if (s == "table") return OverlapPolicy::kTable;
  if (s == "recomputed") return OverlapPolicy::kRecomputed;
  if (s == "strict") return OverlapPolicy::kStrict;
  throw InvalidParameter(fmt::format("unknown overlap policy '{}'", s));
}
std::string to_string(OverlapPolicy p) {
  switch (p) {
    case OverlapPolicy::kTable: return "table";
    case OverlapPolicy::kRecomputed: return "recomputed";
    case OverlapPolicy::kStrict: return "strict";
  }
  return "table";
}
LagSource lag_from_string(const std::string& s) {
  if (s == "coefficients") return LagSource::kCoefficients;
  if (s == "table") return LagSource::kTable;
  throw InvalidParameter(fmt::format("unknown lag source '{}'", s));
}
std::string to_string(LagSource l) {
  return l == LagSource::kTable ? "table" : "coefficients";
}
ConverterPiSignal pi_signal_from_string(const std::string& s) {
  if (s == "converter_quantities") return ConverterPiSignal::kConverterQuantities;
  if (s == "frequency") return ConverterPiSignal::kFrequency;
  throw InvalidParameter(fmt::format("unknown converter PI signal '{}'", s));
}
std::string to_string(ConverterPiSignal s) {
  return s == ConverterPiSignal::kFrequency ? "frequency" : "converter_quantities";
}
int channel_from_string(const std::string& s) {
  if (s == "P_li") return 0;
  if (s == "P_lr") return 1;
  if (s == "P_w") return 2;
  throw InvalidParameter(fmt::format("unknown disturbance channel '{}'", s));
}
std::string channel_name(int c) {
  static const char* names[] = {"P_li", "P_lr", "P_w"};
  return names[c];
}

void read_grid(const YAML::Node& n, const std::string& p, GridParameters& g) {
  MapReader r(n, p);
  r.number("M", g.M);
  r.number("D", g.D);
  r.number("T_g", g.T_g);
  r.number("T_t", g.T_t);
  r.number("R_g", g.R_g);
  r.finish();
}

ScenarioSpec read_scenario(const YAML::Node& n, const std::string& p) {
  ScenarioSpec s;
  MapReader r(n, p);
  r.integer("case", s.case_id);
  r.field("variant", [&](const YAML::Node& v, const std::string& q) {
    s.variant = read_enum<CaseVariant>(v, q, case_variant_from_string);
  });
  r.field("profile", [&](const YAML::Node& v, const std::string& q) {
    s.profile = read_enum<ProfileKind>(v, q, profile_kind_from_string);
  });
  r.finish();
  return s;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

void emit_vector(YAML::Emitter& e, const VectorXd& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index k = 0; k < v.size(); ++k) e << num(v(k));
  e << YAML::EndSeq;
}

void emit_grid(YAML::Emitter& e, const GridParameters& g) {
  e << YAML::BeginMap;
  e << YAML::Key << "M" << YAML::Value << num(g.M);
  e << YAML::Key << "D" << YAML::Value << num(g.D);
  e << YAML::Key << "T_g" << YAML::Value << num(g.T_g);
  e << YAML::Key << "T_t" << YAML::Value << num(g.T_t);
  e << YAML::Key << "R_g" << YAML::Value << num(g.R_g);
  e << YAML::EndMap;
}

}  // namespace

std::vector<ScenarioSpec> ScenarioConfig::default_matrix() {
  std::vector<ScenarioSpec> m;
  for (ProfileKind p : {ProfileKind::kStep, ProfileKind::kContinuous}) {
    for (int c : {1, 2, 3}) m.push_back({c, CaseVariant::kDefault, p});
  }
  return m;
}

void ScenarioConfig::validate() const {
  try {
    run.system.validate();
    run.noise.validate(PlantModel::kNumReferences);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (case_id < 1 || case_id > 3) throw ConfigError(fmt::format("case {} is not 1, 2 or 3", case_id), "simulation.case");
  if (decimate < 1) throw ConfigError("decimate must be at least 1", "simulation.decimate");
  if (!(run.dt > 0.0)) throw ConfigError("dt must be positive", "simulation.dt");
  if (!(run.step_horizon > 0.0) || !(run.continuous_horizon > 0.0)) {
    throw ConfigError("horizons must be positive", "simulation");
  }
  if (sweep.points < 1) throw ConfigError("sweep needs at least one point", "sweep.points");
  const auto& names = sweep_parameter_names();
  if (std::find(names.begin(), names.end(), sweep.parameter) == names.end()) {
    throw ConfigError(fmt::format("unknown sweep parameter '{}'", sweep.parameter),
                      "sweep.parameter");
  }
  for (const auto& s : run.steps) {
    if (s.channel < 0 || s.channel > 2) throw ConfigError("step channel out of range", "steps");
  }
  if (profile == ProfileKind::kImported && run.imported_profile.empty()) {
    throw ConfigError("imported profile selected but no path given", "imported_profile");
  }
}

double ScenarioConfig::horizon() const {
  return profile == ProfileKind::kContinuous ? run.continuous_horizon : run.step_horizon;
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("YAML syntax error: {}", e.msg), "", e.mark.line + 1);
  }
  ScenarioConfig c;
  if (!root || root.IsNull()) return c;
  SystemConfig& s = c.run.system;
  MapReader top(root, "");
  top.string("profile_name", c.profile_name);
  top.field("hvdc", [&](const YAML::Node& n, const std::string& p) {
    HvdcParameters& h = s.hvdc;
    MapReader r(n, p);
    r.integer("N", h.N);
    r.number("TR_r", h.TR_r);
    r.number("TR_i", h.TR_i);
    r.number("V_lr", h.V_lr);
    r.number("V_li", h.V_li);
    r.number("X_cr", h.X_cr);
    r.number("X_ci", h.X_ci);
    r.number("mu_r0", h.mu_r0);
    r.number("mu_i0", h.mu_i0);
    r.number("V_dcr0", h.V_dcr0);
    r.number("V_dci0", h.V_dci0);
    r.number("I_dcr0", h.I_dcr0);
    r.number("I_dci0", h.I_dci0);
    r.number("R", h.R);
    r.number("L", h.L);
    r.number("C", h.C);
    r.number("T_k", h.T_k);
    r.number("T_r", h.T_r);
    r.number("T_i", h.T_i);
    r.number("k_pr", h.k_pr);
    r.number("k_ir", h.k_ir);
    r.number("k_pi", h.k_pi);
    r.number("k_ii", h.k_ii);
    r.finish();
  });
  top.field("base", [&](const YAML::Node& n, const std::string& p) {
    MapReader r(n, p);
    r.number("S_base", s.base.S_base);
    r.number("V_base", s.base.V_base);
    r.finish();
  });
  top.field("model", [&](const YAML::Node& n, const std::string& p) {
    MapReader r(n, p);
    r.field("overlap", [&](const YAML::Node& v, const std::string& q) {
      s.overlap = read_enum<OverlapPolicy>(v, q, overlap_from_string);
    });
    r.field("lag", [&](const YAML::Node& v, const std::string& q) {
      s.lag = read_enum<LagSource>(v, q, lag_from_string);
    });
    r.field("dc_link", [&](const YAML::Node& v, const std::string& q) {
      s.form = read_enum<DcLinkForm>(v, q, dc_link_form_from_string);
    });
    r.finish();
  });
  top.field("grid_inverter", [&](const YAML::Node& n, const std::string& p) {
    read_grid(n, p, s.grid_i);
  });
  top.field("grid_rectifier", [&](const YAML::Node& n, const std::string& p) {
    read_grid(n, p, s.grid_r);
  });
  top.field("pfc", [&](const YAML::Node& n, const std::string& p) {
    PfcParameters& f = s.pfc;
    MapReader r(n, p);
    r.number("R_i", f.R_i);
    r.number("R_r", f.R_r);
    r.number("K_i", f.K_i);
    r.number("K_r", f.K_r);
    r.number("V_i", f.V_i);
    r.number("V_r", f.V_r);
    r.number("T_beta", f.T_beta);
    r.number("T_f", f.T_f);
    r.boolean("droop_enabled", f.droop_enabled);
    r.boolean("inertia_enabled", f.inertia_enabled);
    r.finish();
  });
  top.field("weights", [&](const YAML::Node& n, const std::string& p) {
    MapReader r(n, p);
    r.vector("Q", s.weights.Q);
    r.vector("R_w", s.weights.R_w);
    r.vector("W", s.weights.W);
    r.vector("V_n", s.weights.V_n);
    r.finish();
  });
  top.field("pi", [&](const YAML::Node& n, const std::string& p) {
    MapReader r(n, p);
    r.number("gen_kp", s.pi.gen_kp);
    r.number("gen_ki", s.pi.gen_ki);
    r.number("hvdc_kp", s.pi.hvdc_kp);
    r.number("hvdc_ki", s.pi.hvdc_ki);
    r.field("converter_signal", [&](const YAML::Node& v, const std::string& q) {
      s.pi_signal = read_enum<ConverterPiSignal>(v, q, pi_signal_from_string);
    });
    r.finish();
  });
  top.field("simulation", [&](const YAML::Node& n, const std::string& p) {
    MapReader r(n, p);
    r.integer("case", c.case_id);
    r.field("variant", [&](const YAML::Node& v, const std::string& q) {
      c.variant = read_enum<CaseVariant>(v, q, case_variant_from_string);
    });
    r.field("profile", [&](const YAML::Node& v, const std::string& q) {
      c.profile = read_enum<ProfileKind>(v, q, profile_kind_from_string);
    });
    r.number("dt", c.run.dt);
    r.number("step_horizon", c.run.step_horizon);
    r.number("continuous_horizon", c.run.continuous_horizon);
    r.field("seed", [&](const YAML::Node& v, const std::string& q) {
      c.run.seed = static_cast<std::uint64_t>(read_integer(v, q));
    });
    r.integer("decimate", c.decimate);
    r.finish();
  });
  top.field("steps", [&](const YAML::Node& n, const std::string& p) {
    if (!n.IsSequence()) fail(n, p, "expected a list of steps");
    c.run.steps.clear();
    for (std::size_t k = 0; k < n.size(); ++k) {
      StepEvent e;
      MapReader r(n[k], fmt::format("{}[{}]", p, k));
      r.field("channel", [&](const YAML::Node& v, const std::string& q) {
        e.channel = read_enum<int>(v, q, channel_from_string);
      });
      r.number("time", e.time);
      r.number("magnitude", e.magnitude);
      r.number("hold", e.hold);
      r.finish();
      c.run.steps.push_back(e);
    }
  });
  top.field("continuous", [&](const YAML::Node& n, const std::string& p) {
    ContinuousProfileSpec& cs = c.run.continuous;
    MapReader r(n, p);
    r.number("peak", cs.peak);
    r.number("max_frequency", cs.max_frequency);
    r.integer("components", cs.components);
    r.number("walk_scale", cs.walk_scale);
    r.boolean("include_wind", cs.include_wind);
    r.finish();
  });
  top.string("imported_profile", c.run.imported_profile);
  top.field("noise", [&](const YAML::Node& n, const std::string& p) {
    NoiseSpec& ns = c.run.noise;
    MapReader r(n, p);
    r.field("seed", [&](const YAML::Node& v, const std::string& q) {
      ns.seed = static_cast<std::uint64_t>(read_integer(v, q));
    });
    r.vector("input_std", ns.input_std);
    r.field("measurement_std", [&](const YAML::Node& v, const std::string& q) {
      if (!v.IsMap()) fail(v, q, "expected a mapping from output name to deviation");
      ns.measurement_std.clear();
      for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string key = it->first.Scalar();
        ns.measurement_std[key] = read_double(it->second, q + "." + key);
      }
    });
    r.finish();
  });
  top.field("sweep", [&](const YAML::Node& n, const std::string& p) {
    MapReader r(n, p);
    r.string("parameter", c.sweep.parameter);
    r.field("range", [&](const YAML::Node& v, const std::string& q) {
      if (v.IsNull()) {
        c.sweep.range.reset();
        return;
      }
      const VectorXd lh = read_vector(v, q);
      if (lh.size() != 2) fail(v, q, "range needs two values");
      c.sweep.range = std::make_pair(lh(0), lh(1));
    });
    r.integer("points", c.sweep.points);
    r.finish();
  });
  top.field("case_matrix", [&](const YAML::Node& n, const std::string& p) {
    if (!n.IsSequence()) fail(n, p, "expected a list of scenarios");
    c.matrix.clear();
    for (std::size_t k = 0; k < n.size(); ++k) {
      c.matrix.push_back(read_scenario(n[k], fmt::format("{}[{}]", p, k)));
    }
  });
  top.field("output", [&](const YAML::Node& n, const std::string& p) {
    MapReader r(n, p);
    r.string("directory", c.output_dir);
    r.finish();
  });
  top.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ScenarioConfig& c) {
  const SystemConfig& s = c.run.system;
  const HvdcParameters& h = s.hvdc;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "profile_name" << YAML::Value << c.profile_name;

  e << YAML::Key << "hvdc" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "N" << YAML::Value << h.N;
  const std::pair<const char*, double> hv[] = {
      {"TR_r", h.TR_r},     {"TR_i", h.TR_i},     {"V_lr", h.V_lr},     {"V_li", h.V_li},
      {"X_cr", h.X_cr},     {"X_ci", h.X_ci},     {"mu_r0", h.mu_r0},   {"mu_i0", h.mu_i0},
      {"V_dcr0", h.V_dcr0}, {"V_dci0", h.V_dci0}, {"I_dcr0", h.I_dcr0}, {"I_dci0", h.I_dci0},
      {"R", h.R},           {"L", h.L},           {"C", h.C},           {"T_k", h.T_k},
      {"T_r", h.T_r},       {"T_i", h.T_i},       {"k_pr", h.k_pr},     {"k_ir", h.k_ir},
      {"k_pi", h.k_pi},     {"k_ii", h.k_ii}};
  for (const auto& [k, v] : hv) e << YAML::Key << k << YAML::Value << num(v);
  e << YAML::EndMap;

  e << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "S_base" << YAML::Value << num(s.base.S_base);
  e << YAML::Key << "V_base" << YAML::Value << num(s.base.V_base);
  e << YAML::EndMap;

  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "overlap" << YAML::Value << to_string(s.overlap);
  e << YAML::Key << "lag" << YAML::Value << to_string(s.lag);
  e << YAML::Key << "dc_link" << YAML::Value << to_string(s.form);
  e << YAML::EndMap;

  e << YAML::Key << "grid_inverter" << YAML::Value;
  emit_grid(e, s.grid_i);
  e << YAML::Key << "grid_rectifier" << YAML::Value;
  emit_grid(e, s.grid_r);

  const PfcParameters& f = s.pfc;
  e << YAML::Key << "pfc" << YAML::Value << YAML::BeginMap;
  const std::pair<const char*, double> pv[] = {{"R_i", f.R_i}, {"R_r", f.R_r},
                                               {"K_i", f.K_i}, {"K_r", f.K_r},
                                               {"V_i", f.V_i}, {"V_r", f.V_r},
                                               {"T_beta", f.T_beta}, {"T_f", f.T_f}};
  for (const auto& [k, v] : pv) e << YAML::Key << k << YAML::Value << num(v);
  e << YAML::Key << "droop_enabled" << YAML::Value << (f.droop_enabled ? "true" : "false");
  e << YAML::Key << "inertia_enabled" << YAML::Value << (f.inertia_enabled ? "true" : "false");
  e << YAML::EndMap;

  e << YAML::Key << "weights" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "Q" << YAML::Value;
  emit_vector(e, s.weights.Q);
  e << YAML::Key << "R_w" << YAML::Value;
  emit_vector(e, s.weights.R_w);
  e << YAML::Key << "W" << YAML::Value;
  emit_vector(e, s.weights.W);
  e << YAML::Key << "V_n" << YAML::Value;
  emit_vector(e, s.weights.V_n);
  e << YAML::EndMap;

  e << YAML::Key << "pi" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "gen_kp" << YAML::Value << num(s.pi.gen_kp);
  e << YAML::Key << "gen_ki" << YAML::Value << num(s.pi.gen_ki);
  e << YAML::Key << "hvdc_kp" << YAML::Value << num(s.pi.hvdc_kp);
  e << YAML::Key << "hvdc_ki" << YAML::Value << num(s.pi.hvdc_ki);
  e << YAML::Key << "converter_signal" << YAML::Value << to_string(s.pi_signal);
  e << YAML::EndMap;

  e << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "case" << YAML::Value << c.case_id;
  e << YAML::Key << "variant" << YAML::Value << to_string(c.variant);
  e << YAML::Key << "profile" << YAML::Value << to_string(c.profile);
  e << YAML::Key << "dt" << YAML::Value << num(c.run.dt);
  e << YAML::Key << "step_horizon" << YAML::Value << num(c.run.step_horizon);
  e << YAML::Key << "continuous_horizon" << YAML::Value << num(c.run.continuous_horizon);
  e << YAML::Key << "seed" << YAML::Value << c.run.seed;
  e << YAML::Key << "decimate" << YAML::Value << c.decimate;
  e << YAML::EndMap;

  e << YAML::Key << "steps" << YAML::Value << YAML::BeginSeq;
  for (const auto& st : c.run.steps) {
    e << YAML::BeginMap;
    e << YAML::Key << "channel" << YAML::Value << channel_name(st.channel);
    e << YAML::Key << "time" << YAML::Value << num(st.time);
    e << YAML::Key << "magnitude" << YAML::Value << num(st.magnitude);
    e << YAML::Key << "hold" << YAML::Value << num(st.hold);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  const ContinuousProfileSpec& cs = c.run.continuous;
  e << YAML::Key << "continuous" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "peak" << YAML::Value << num(cs.peak);
  e << YAML::Key << "max_frequency" << YAML::Value << num(cs.max_frequency);
  e << YAML::Key << "components" << YAML::Value << cs.components;
  e << YAML::Key << "walk_scale" << YAML::Value << num(cs.walk_scale);
  e << YAML::Key << "include_wind" << YAML::Value << (cs.include_wind ? "true" : "false");
  e << YAML::EndMap;

  e << YAML::Key << "imported_profile" << YAML::Value << YAML::DoubleQuoted
    << c.run.imported_profile;

  const NoiseSpec& ns = c.run.noise;
  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << ns.seed;
  e << YAML::Key << "input_std" << YAML::Value;
  emit_vector(e, ns.input_std);
  e << YAML::Key << "measurement_std" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (const auto& [k, v] : ns.measurement_std) e << YAML::Key << k << YAML::Value << num(v);
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "parameter" << YAML::Value << c.sweep.parameter;
  e << YAML::Key << "range" << YAML::Value;
  if (c.sweep.range) {
    e << YAML::Flow << YAML::BeginSeq << num(c.sweep.range->first) << num(c.sweep.range->second)
      << YAML::EndSeq;
  } else {
    e << YAML::Null;
  }
  e << YAML::Key << "points" << YAML::Value << c.sweep.points;
  e << YAML::EndMap;

  e << YAML::Key << "case_matrix" << YAML::Value << YAML::BeginSeq;
  for (const auto& sc : c.matrix) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "case" << YAML::Value << sc.case_id;
    e << YAML::Key << "variant" << YAML::Value << to_string(sc.variant);
    e << YAML::Key << "profile" << YAML::Value << to_string(sc.profile);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << c.output_dir;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace hvdc
