#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hvdc/simulation.hpp"
#include "hvdc/system_config.hpp"

namespace hvdc {

struct SweepSpec {
  std::string parameter = "L";
  std::optional<std::pair<double, double>> range;  ///< default_sweep_range if unset
  int points = 25;
};

/// Complete run description. Every field has a default, and the emitted
/// form lists every field so that a run is self-describing.
struct ScenarioConfig {
  std::string profile_name = "jeju-haenam";
  CaseMatrixConfig run;  ///< system, profiles, noise, dt, horizons, seed
  int case_id = 1;
  CaseVariant variant = CaseVariant::kDefault;
  ProfileKind profile = ProfileKind::kStep;
  SweepSpec sweep;
  std::string output_dir = "out";
  int decimate = 10;

  /// Scenarios of case-matrix; defaults to cases 1-3 on both profiles.
  std::vector<ScenarioSpec> matrix = default_matrix();

  static std::vector<ScenarioSpec> default_matrix();
  void validate() const;
  /// Horizon of the selected profile.
  double horizon() const;
};

/// Parses YAML text. Missing keys keep their defaults; unknown keys and
/// malformed values raise ConfigError with the key path and source line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Emits every field; parse_config(emit_config(c)) reproduces c exactly.
std::string emit_config(const ScenarioConfig& cfg);

}  // namespace hvdc
