#pragma once

#include <string>
#include <vector>

#include "hvdc/converter_model.hpp"
#include "hvdc/state_space.hpp"

namespace hvdc {

/// One AC area in per unit on the common power base.
struct GridParameters {
  double M = 8.0;    ///< inertia constant (s)
  double D = 1.0;    ///< load damping (pu/pu)
  double T_g = 0.2;  ///< governor time constant (s)
  double T_t = 0.5;  ///< turbine time constant (s)
  double R_g = 0.5;  ///< generator droop (pu)

  void validate() const;
};

/// Primary frequency control carried by the converters. A gain of exactly
/// zero disables the corresponding loop; for the frequency droops R_i and
/// R_r this means the loop gain 1/R is removed.
struct PfcParameters {
  double R_i = 0.5;
  double R_r = 0.5;
  double K_i = 0.5;
  double K_r = 0.5;
  double V_i = 5.0;
  double V_r = 5.0;
  double T_beta = 0.1;
  double T_f = 0.1;
  bool droop_enabled = true;
  bool inertia_enabled = true;

  void validate() const;
  double inverter_droop_gain() const;   ///< 1/R_i or 0
  double rectifier_droop_gain() const;  ///< 1/R_r or 0
  double inverter_voltage_droop() const;
  double rectifier_voltage_droop() const;
  double inverter_inertia() const;
  double rectifier_inertia() const;
};

/// PFC set with the rectifier-side loops and the voltage droops removed.
PfcParameters inverter_only_pfc(PfcParameters pfc);

/// Reference inputs, then disturbance inputs.
inline const std::vector<std::string>& plant_input_labels() {
  static const std::vector<std::string> labels = {
      "Pgi_ref", "Pgr_ref", "Idci_ref", "Vdcr_ref", "Pli", "Plr_net"};
  return labels;
}

/// Measured outputs of the plant, in order.
inline const std::vector<std::string>& measured_output_labels() {
  static const std::vector<std::string> labels = {"fi", "fr", "Vdcr", "Vdrop"};
  return labels;
}

/// Additional monitored outputs appended after the measured ones.
inline const std::vector<std::string>& monitor_output_labels() {
  static const std::vector<std::string> labels = {
      "Vdci", "Idci", "Idcr", "Pdci", "Pdcr", "Pgi", "Pgr",
      "Pti",  "Ptr",  "Pci",  "Pcr"};
  return labels;
}

/// State order of the simplified plant.
inline const std::vector<std::string>& plant_state_labels() {
  static const std::vector<std::string> labels = {
      "fi", "Pgi", "Pti", "Pci", "Idci", "fr",
      "Pgr", "Ptr", "Pcr", "Vdcr", "Vdrop"};
  return labels;
}

/// Two-grid plant with converter PFC loops closed.
struct PlantModel {
  StateSpaceModel sys;
  DcLinkForm form = DcLinkForm::kSimplified;

  static constexpr int kNumReferences = 4;
  static constexpr int kNumDisturbances = 2;
  static constexpr int kNumMeasured = 4;

  MatrixXd Br() const { return sys.B.leftCols(kNumReferences); }
  MatrixXd Bw() const { return sys.B.rightCols(kNumDisturbances); }
  MatrixXd Cm() const { return sys.C.topRows(kNumMeasured); }
  MatrixXd Dm() const { return sys.D.topRows(kNumMeasured); }
};

/// Integral-augmented plant. States are the four integrals followed by the
/// plant states; measured outputs are the plant measurements followed by
/// the integrals.
struct AugmentedModel {
  StateSpaceModel sys;
  DcLinkForm form = DcLinkForm::kSimplified;

  static constexpr int kNumReferences = 4;
  static constexpr int kNumDisturbances = 2;
  static constexpr int kNumIntegrals = 4;
  static constexpr int kNumMeasured = 8;

  const MatrixXd& A() const { return sys.A; }
  MatrixXd Br() const { return sys.B.leftCols(kNumReferences); }
  MatrixXd Bw() const { return sys.B.rightCols(kNumDisturbances); }
  MatrixXd Cm() const { return sys.C.topRows(kNumMeasured); }
  MatrixXd Dmr() const {
    return sys.D.topRows(kNumMeasured).leftCols(kNumReferences);
  }
  MatrixXd Dmw() const {
    return sys.D.topRows(kNumMeasured).rightCols(kNumDisturbances);
  }
};

/// Governor, turbine and swing of one area. Inputs [Pref, Pext] where Pext
/// is the net external injection; states and outputs [f, Pg, Pt].
/// `suffix` ("i" or "r") is appended to every label.
StateSpaceModel build_generator(const GridParameters& gp,
                                const std::string& suffix);

/// Interconnects the converter model (from build_hvdc_model) with both
/// areas and the PFC loops. For the simplified form the state order is
/// plant_state_labels() and the structure is checked against
/// plant_sparsity_pattern(); StructureViolation is thrown on mismatch.
PlantModel assemble_plant(const StateSpaceModel& hvdc, const NominalPoint& nominal,
                          DcLinkForm form, const GridParameters& gp_i,
                          const GridParameters& gp_r, const PfcParameters& pfc);

/// Convenience: converter model plus assembly.
PlantModel build_plant(const HvdcPerUnit& hv, DcLinkForm form,
                       const GridParameters& gp_i, const GridParameters& gp_r,
                       const PfcParameters& pfc);

/// Admissible nonzero pattern of the simplified plant: A (11x11) followed
/// by B (11x6) in one 11x17 boolean array.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> plant_sparsity_pattern();

/// Throws StructureViolation if a nonzero of [A B] falls outside the pattern.
void check_structure(const PlantModel& plant);

/// Appends the integrals of the measured outputs.
AugmentedModel augment(const PlantModel& plant);

}  // namespace hvdc
