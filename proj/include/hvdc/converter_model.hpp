#pragma once

#include <numbers>
#include <string>

#include "hvdc/state_space.hpp"

namespace hvdc {

/// LCC HVDC link data in SI units (angles in radians).
struct HvdcParameters {
  int N = 2;
  double TR_r = 0.9;
  double TR_i = 0.9;
  double V_lr = 75.9e3;
  double V_li = 82.2e3;
  double X_cr = 7.99;
  double X_ci = 7.99;
  double mu_r0 = 2.44 * std::numbers::pi / 180.0;
  double mu_i0 = 2.44 * std::numbers::pi / 180.0;
  double V_dcr0 = 184.0e3;
  double V_dci0 = 183.5e3;
  double I_dcr0 = 407.6;
  double I_dci0 = 407.6;
  double R = 1.116;
  double L = 0.2;
  double C = 54e-6;
  double T_k = 0.001;
  double T_r = 0.02;
  double T_i = 0.02;
  double k_pr = 5.5;
  double k_ir = 20.1;
  double k_pi = 0.001;
  double k_ii = 10.0;

  /// Throws InvalidParameter when a field is out of its admissible range.
  void validate() const;
};

/// Per-unit bases. The voltage base defaults to the rectifier nominal.
struct PerUnitBase {
  double S_base = 150e6;
  double V_base = 184.0e3;

  double I_base() const { return S_base / V_base; }
  double Z_base() const { return V_base * V_base / S_base; }
};

/// Which overlap angle feeds the linearization coefficients.
enum class OverlapPolicy {
  kTable,       ///< listed overlap angle; the solved one is only reported
  kRecomputed,  ///< overlap angle solved from the commutation equation
  kStrict,      ///< throw InconsistentOverlap when the two disagree
};

/// Source of the first-order converter lag in the reduced loops.
enum class LagSource {
  kCoefficients,  ///< m1/m2 and n1/n2
  kTable,         ///< T_i and T_r of the parameter set
};

struct TerminalPoint {
  double beta0 = 0.0;      ///< firing (rectifier) or extinction (inverter) angle
  double V_dc0 = 0.0;
  double I_dc0 = 0.0;
  double mu_table = 0.0;
  double mu_solved = 0.0;  ///< from the commutation equation at beta0
  double mu_used = 0.0;    ///< the one used by compute_coefficients
};

struct OperatingPoint {
  TerminalPoint rectifier;
  TerminalPoint inverter;
  double alpha0() const { return rectifier.beta0; }
  double gamma0() const { return inverter.beta0; }
};

/// Solves the terminal-voltage equation for beta in (0, pi/2) by bisection
/// and the commutation equation for the overlap angle.
/// Throws NoSolution, or InconsistentOverlap under OverlapPolicy::kStrict.
OperatingPoint solve_operating_point(const HvdcParameters& p,
                                     OverlapPolicy policy = OverlapPolicy::kTable);

/// Terminal-voltage residual a1 cos(beta) - a2 I - V, relative to V.
double terminal_voltage_residual(const HvdcParameters& p, bool rectifier,
                                 double beta, double I, double V);
/// Commutation residual a4 I - cos(beta) + cos(beta + mu).
double commutation_residual(const HvdcParameters& p, bool rectifier,
                            double beta, double mu, double I);
/// Converter power from firing and overlap angles.
double converter_power_from_angles(const HvdcParameters& p, bool rectifier,
                                   double beta, double mu);

struct TerminalCoefficients {
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0;
  double b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0;
};

/// Coefficients of one terminal at (beta0, mu0); the rectifier is
/// normalized by its voltage and the inverter by its current.
TerminalCoefficients terminal_coefficients(const HvdcParameters& p, bool rectifier,
                                           double beta0, double mu0);

struct LinearizationCoefficients {
  TerminalCoefficients r;
  TerminalCoefficients i;
  double c1i = 0, c2i = 0, c1r = 0, c2r = 0;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  double n1 = 0, n2 = 0, n3 = 0;

  double m3_over_m1() const { return m3 / m1; }
  double n3_over_n1() const { return n3 / n1; }
  double inverter_time_constant() const { return m1 / m2; }
  double rectifier_time_constant() const { return n1 / n2; }
};

/// Evaluates the linearization coefficients at the operating point.
/// Throws DegenerateModel if m1, m2, n1 or n2 vanishes.
LinearizationCoefficients compute_coefficients(const HvdcParameters& p,
                                               const OperatingPoint& op);

/// Exact converter control-loop response and its first-order reduction.
struct ConverterLoop {
  FirstOrderTf exact;
  FirstOrderTf simplified;
  double validity_ratio = 0.0;  ///< feedthrough share of the exact form
  bool approximation_valid = false;  ///< validity_ratio below 0.01
};

/// Inverter current loop I_dci / I_dci_ref.
ConverterLoop inverter_current_tf(const LinearizationCoefficients& c);
/// Rectifier voltage loop V_dcr / V_dcr_ref.
ConverterLoop rectifier_voltage_tf(const LinearizationCoefficients& c);

/// DC-link data in any consistent unit system. R and L are per half of the
/// symmetric T; C is the midpoint capacitance.
struct DcLinkParameters {
  double R = 0.0;
  double L = 0.0;
  double C = 0.0;
  double T_k = 0.0;
};

enum class DcLinkForm { kOriginal, kSimplified };

std::string to_string(DcLinkForm form);
DcLinkForm dc_link_form_from_string(const std::string& s);

/// DC link with inputs [Vdcr, Idci] and outputs [Vdci, Idcr].
/// The original form has states [dc_sigma, dc_mid] (branch current sum and
/// midpoint voltage); the simplified form has the state [Vdrop].
StateSpaceModel build_dc_link(const DcLinkParameters& p, DcLinkForm form);

/// Nominal terminal quantities used by the power linearization.
struct NominalPoint {
  double V_dcr0 = 1.0;
  double V_dci0 = 1.0;
  double I_dcr0 = 1.0;
  double I_dci0 = 1.0;
};

/// Linear power maps. Row order of the coefficient vectors is
/// [Vdcr, Vdci, Idci, Idcr].
struct PowerMaps {
  Eigen::RowVector4d inverter;
  Eigen::RowVector4d rectifier;
};

PowerMaps power_linearization(const NominalPoint& nominal);

/// Adds outputs Vdrop, Pdci and Pdcr to a model that already exposes
/// Vdcr, Vdci, Idci and Idcr.
void append_power_outputs(StateSpaceModel& sys, const NominalPoint& nominal);

/// Everything the grid model needs from the converter side, in per unit.
struct HvdcPerUnit {
  NominalPoint nominal;
  DcLinkParameters dc_link;
  ConverterLoop inverter;
  ConverterLoop rectifier;
};

/// Builds the per-unit converter description: nominal values scaled by the
/// bases, the DC link in per unit of time, and both control loops.
HvdcPerUnit to_per_unit(const HvdcParameters& p, const PerUnitBase& base,
                        OverlapPolicy policy = OverlapPolicy::kTable,
                        LagSource lag = LagSource::kCoefficients);

/// Composite converter model with inputs [Vdcr_ref, Idci_ref] and outputs
/// [Pdcr, Pdci, Vdcr, Vdci, Idci, Idcr, Vdrop].
StateSpaceModel build_hvdc_model(const HvdcPerUnit& hv, DcLinkForm form);

}  // namespace hvdc
