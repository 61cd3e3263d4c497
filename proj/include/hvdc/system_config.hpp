#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hvdc/control_synthesis.hpp"
#include "hvdc/converter_model.hpp"
#include "hvdc/grid_assembly.hpp"

namespace hvdc {

/// Every parameter needed to build, synthesize and analyze the two-grid
/// system. Defaults are the Jeju-Haenam data set.
struct SystemConfig {
  HvdcParameters hvdc;
  PerUnitBase base;
  GridParameters grid_i;
  GridParameters grid_r;
  PfcParameters pfc;
  LqgWeights weights = LqgWeights::defaults();
  PiGains pi;
  ConverterPiSignal pi_signal = ConverterPiSignal::kConverterQuantities;
  OverlapPolicy overlap = OverlapPolicy::kTable;
  LagSource lag = LagSource::kCoefficients;
  DcLinkForm form = DcLinkForm::kSimplified;

  void validate() const;
};

HvdcPerUnit per_unit(const SystemConfig& cfg);

/// Plant with the configured PFC, or with an explicit PFC set.
PlantModel build_plant(const SystemConfig& cfg);
PlantModel build_plant(const SystemConfig& cfg, const PfcParameters& pfc,
                       DcLinkForm form);

/// Parameters accepted by set_parameter and the sweeps. R_ir and K_ir move
/// both sides together. L, R and C are SI values of the DC line.
const std::vector<std::string>& sweep_parameter_names();
void set_parameter(SystemConfig& cfg, const std::string& name, double value);
double get_parameter(const SystemConfig& cfg, const std::string& name);

/// Default sweep bounds (SI units) for each parameter.
std::pair<double, double> default_sweep_range(const std::string& name);

/// L and C only enter the original DC-link form, so their sweeps switch
/// to it; other parameters keep the configured form.
DcLinkForm sweep_form(const std::string& name, DcLinkForm configured);

}  // namespace hvdc
