#include "hvdc/system_config.hpp"

#include <fmt/format.h>

#include "hvdc/errors.hpp"

namespace hvdc {

void SystemConfig::validate() const {
  hvdc.validate();
  if (!(base.S_base > 0.0) || !(base.V_base > 0.0)) {
    throw InvalidParameter("per-unit bases must be positive");
  }
  grid_i.validate();
  grid_r.validate();
  pfc.validate();
  weights.validate();
  if (pi.gen_kp < 0 || pi.gen_ki < 0 || pi.hvdc_kp < 0 || pi.hvdc_ki < 0) {
    throw InvalidParameter("PI gains must be nonnegative");
  }
}

HvdcPerUnit per_unit(const SystemConfig& cfg) {
  return to_per_unit(cfg.hvdc, cfg.base, cfg.overlap, cfg.lag);
}

PlantModel build_plant(const SystemConfig& cfg) {
  return build_plant(cfg, cfg.pfc, cfg.form);
}

PlantModel build_plant(const SystemConfig& cfg, const PfcParameters& pfc,
                       DcLinkForm form) {
  return build_plant(per_unit(cfg), form, cfg.grid_i, cfg.grid_r, pfc);
}

const std::vector<std::string>& sweep_parameter_names() {
  static const std::vector<std::string> names = {"L",   "R",   "C",   "R_i", "R_r",
                                                 "R_ir", "K_i", "K_r", "K_ir"};
  return names;
}

void set_parameter(SystemConfig& cfg, const std::string& name, double value) {
  if (name == "L") {
    cfg.hvdc.L = value;
  } else if (name == "R") {
    cfg.hvdc.R = value;
  } else if (name == "C") {
    cfg.hvdc.C = value;
  } else if (name == "R_i") {
    cfg.pfc.R_i = value;
  } else if (name == "R_r") {
    cfg.pfc.R_r = value;
  } else if (name == "R_ir") {
    cfg.pfc.R_i = cfg.pfc.R_r = value;
  } else if (name == "K_i") {
    cfg.pfc.K_i = value;
  } else if (name == "K_r") {
    cfg.pfc.K_r = value;
  } else if (name == "K_ir") {
    cfg.pfc.K_i = cfg.pfc.K_r = value;
  } else {
    throw InvalidParameter(fmt::format("unknown sweep parameter '{}'", name));
  }
}

double get_parameter(const SystemConfig& cfg, const std::string& name) {
  if (name == "L") return cfg.hvdc.L;
  if (name == "R") return cfg.hvdc.R;
  if (name == "C") return cfg.hvdc.C;
  if (name == "R_i" || name == "R_ir") return cfg.pfc.R_i;
  if (name == "R_r") return cfg.pfc.R_r;
  if (name == "K_i" || name == "K_ir") return cfg.pfc.K_i;
  if (name == "K_r") return cfg.pfc.K_r;
  throw InvalidParameter(fmt::format("unknown sweep parameter '{}'", name));
}

std::pair<double, double> default_sweep_range(const std::string& name) {
  if (name == "L") return {0.01, 1.0};
  if (name == "R") return {0.1, 5.0};
  if (name == "C") return {10e-6, 200e-6};
  if (name == "R_i" || name == "R_r" || name == "R_ir" || name == "K_i" ||
      name == "K_r" || name == "K_ir") {
    return {0.1, 10.0};
  }
  throw InvalidParameter(fmt::format("unknown sweep parameter '{}'", name));
}

DcLinkForm sweep_form(const std::string& name, DcLinkForm configured) {
  return (name == "L" || name == "C") ? DcLinkForm::kOriginal : configured;
}

}  // namespace hvdc
