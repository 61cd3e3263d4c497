#include "hvdc/grid_assembly.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hvdc/errors.hpp"

namespace hvdc {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(fmt::format("{} must be positive, got {}", name, v));
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(fmt::format("{} must be nonnegative, got {}", name, v));
  }
}

/// Filtered derivative of frequency, realized with the emulated power as
/// its state. Inputs [f, Pg, Pext] reproduce the swing derivative.
StateSpaceModel build_inertia(const GridParameters& gp, double V, double T_beta,
                              const std::string& s) {
  const double k = V / (T_beta * gp.M);
  MatrixXd A(1, 1), B(1, 3), C(1, 1), D(1, 3);
  A << -1.0 / T_beta;
  B << -k * gp.D, k, k;
  C << 1.0;
  D.setZero();
  return make_model(A, B, C, D, {"Pc" + s},
                    {"in_f" + s, "in_Pg" + s, "in_Pext" + s}, {"Pc" + s});
}

}  // namespace

void GridParameters::validate() const {
  require_positive(M, "M");
  require_positive(D, "D");
  require_positive(T_g, "T_g");
  require_positive(T_t, "T_t");
  require_positive(R_g, "R_g");
}

void PfcParameters::validate() const {
  require_nonnegative(R_i, "R_i");
  require_nonnegative(R_r, "R_r");
  require_nonnegative(K_i, "K_i");
  require_nonnegative(K_r, "K_r");
  require_nonnegative(V_i, "V_i");
  require_nonnegative(V_r, "V_r");
  require_positive(T_beta, "T_beta");
  require_positive(T_f, "T_f");
}

double PfcParameters::inverter_droop_gain() const {
  return droop_enabled && R_i > 0.0 ? 1.0 / R_i : 0.0;
}
double PfcParameters::rectifier_droop_gain() const {
  return droop_enabled && R_r > 0.0 ? 1.0 / R_r : 0.0;
}
double PfcParameters::inverter_voltage_droop() const {
  return droop_enabled ? K_i : 0.0;
}
double PfcParameters::rectifier_voltage_droop() const {
  return droop_enabled ? K_r : 0.0;
}
double PfcParameters::inverter_inertia() const {
  return inertia_enabled ? V_i : 0.0;
}
double PfcParameters::rectifier_inertia() const {
  return inertia_enabled ? V_r : 0.0;
}

PfcParameters inverter_only_pfc(PfcParameters pfc) {
  pfc.R_r = 0.0;
  pfc.V_r = 0.0;
  pfc.K_r = 0.0;
  pfc.K_i = 0.0;
  return pfc;
}

StateSpaceModel build_generator(const GridParameters& gp,
                                const std::string& s) {
  gp.validate();
  // States [f, Pg, Pt]: swing, turbine output, governor output.
  MatrixXd A(3, 3), B(3, 2);
  A << -gp.D / gp.M, 1.0 / gp.M, 0.0,
       0.0, -1.0 / gp.T_t, 1.0 / gp.T_t,
       -1.0 / (gp.R_g * gp.T_g), 0.0, -1.0 / gp.T_g;
  B << 0.0, 1.0 / gp.M,
       0.0, 0.0,
       1.0 / gp.T_g, 0.0;
  return make_model(A, B, MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 2),
                    {"f" + s, "Pg" + s, "Pt" + s}, {"Pref" + s, "Pext" + s},
                    {"f" + s, "Pg" + s, "Pt" + s});
}

PlantModel assemble_plant(const StateSpaceModel& hvdc, const NominalPoint& nom,
                          DcLinkForm form, const GridParameters& gp_i,
                          const GridParameters& gp_r, const PfcParameters& pfc) {
  pfc.validate();
  StateSpaceModel hv = hvdc;
  if (hv.input_labels != std::vector<std::string>{"Vdcr_ref", "Idci_ref"}) {
    throw DimensionMismatch("converter model must have inputs [Vdcr_ref, Idci_ref]");
  }
  hv.input_labels = {"hv_Vdcr_cmd", "hv_Idci_cmd"};

  std::vector<StateSpaceModel> blocks = {
      hv,
      build_generator(gp_i, "i"),
      build_inertia(gp_i, pfc.inverter_inertia(), pfc.T_beta, "i"),
      build_generator(gp_r, "r"),
      build_inertia(gp_r, pfc.rectifier_inertia(), pfc.T_beta, "r"),
  };

  const double Vi0 = nom.V_dci0, I0 = nom.I_dcr0;
  const std::vector<SignalTerm> ext_i = {{1.0, "Pdci"}, {-1.0, "Pli"}};
  const std::vector<SignalTerm> ext_r = {{-1.0, "Pdcr"}, {-1.0, "Plr_net"}};
  std::vector<Junction> wiring = {
      {"hv_Idci_cmd",
       {{1.0, "Idci_ref"},
        {-pfc.inverter_droop_gain() / Vi0, "fi"},
        {pfc.inverter_inertia() > 0.0 ? -1.0 / Vi0 : 0.0, "Pci"},
        {pfc.inverter_voltage_droop() / Vi0, "Vdci"}}},
      {"hv_Vdcr_cmd",
       {{1.0, "Vdcr_ref"},
        {pfc.rectifier_droop_gain() / I0, "fr"},
        {pfc.rectifier_inertia() > 0.0 ? 1.0 / I0 : 0.0, "Pcr"},
        {-pfc.rectifier_voltage_droop() / I0, "Vdcr"}}},
      {"Prefi", {{1.0, "Pgi_ref"}}},
      {"Pexti", ext_i},
      {"in_fi", {{1.0, "fi"}}},
      {"in_Pgi", {{1.0, "Pgi"}}},
      {"in_Pexti", ext_i},
      {"Prefr", {{1.0, "Pgr_ref"}}},
      {"Pextr", ext_r},
      {"in_fr", {{1.0, "fr"}}},
      {"in_Pgr", {{1.0, "Pgr"}}},
      {"in_Pextr", ext_r},
  };
  StateSpaceModel sys = interconnect(blocks, wiring, plant_input_labels());

  std::vector<std::string> order_labels;
  if (form == DcLinkForm::kSimplified) {
    order_labels = plant_state_labels();
  } else {
    order_labels = {"fi", "Pgi", "Pti", "Pci", "inv_loop", "fr", "Pgr",
                    "Ptr", "Pcr", "rec_loop", "dc_sigma", "dc_mid"};
  }
  std::vector<int> order;
  for (const auto& l : order_labels) order.push_back(sys.state_index(l));
  sys = sys.permuted(order);

  std::vector<std::string> outs = measured_output_labels();
  const auto& mon = monitor_output_labels();
  outs.insert(outs.end(), mon.begin(), mon.end());
  PlantModel plant{sys.select_outputs(outs), form};
  if (form == DcLinkForm::kSimplified) check_structure(plant);
  return plant;
}

PlantModel build_plant(const HvdcPerUnit& hv, DcLinkForm form,
                       const GridParameters& gp_i, const GridParameters& gp_r,
                       const PfcParameters& pfc) {
  return assemble_plant(build_hvdc_model(hv, form), hv.nominal, form, gp_i,
                        gp_r, pfc);
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> plant_sparsity_pattern() {
  const auto& x = plant_state_labels();
  auto idx = [&](const std::string& s) {
    return static_cast<int>(std::find(x.begin(), x.end(), s) - x.begin());
  };
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> P =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(11, 17, false);
  auto set = [&](const std::string& row, std::initializer_list<const char*> cols) {
    for (const char* c : cols) P(idx(row), idx(c)) = true;
  };
  set("fi", {"fi", "Pgi", "Idci", "Vdcr", "Vdrop"});
  set("Pgi", {"Pgi", "Pti"});
  set("Pti", {"fi", "Pti"});
  set("Pci", {"fi", "Pgi", "Pci", "Idci", "Vdcr", "Vdrop"});
  set("Idci", {"fi", "Pci", "Idci", "Vdcr", "Vdrop"});
  set("fr", {"Idci", "fr", "Pgr", "Vdcr"});
  set("Pgr", {"Pgr", "Ptr"});
  set("Ptr", {"fr", "Ptr"});
  set("Pcr", {"Idci", "fr", "Pgr", "Pcr", "Vdcr"});
  set("Vdcr", {"fr", "Pcr", "Vdcr"});
  set("Vdrop", {"Idci", "Vdrop"});
  // Input columns: Pgi_ref, Pgr_ref, Idci_ref, Vdcr_ref, Pli, Plr_net.
  P(idx("Pti"), 11) = true;
  P(idx("Ptr"), 12) = true;
  P(idx("Idci"), 13) = true;
  P(idx("Vdcr"), 14) = true;
  P(idx("fi"), 15) = true;
  P(idx("Pci"), 15) = true;
  P(idx("fr"), 16) = true;
  P(idx("Pcr"), 16) = true;
  return P;
}

void check_structure(const PlantModel& plant) {
  const auto& sys = plant.sys;
  if (sys.state_labels != plant_state_labels() || sys.num_inputs() != 6) {
    throw StructureViolation("plant does not use the simplified state order");
  }
  MatrixXd AB(11, 17);
  AB << sys.A, sys.B;
  const double tol = 1e-12 * std::max(1.0, AB.cwiseAbs().maxCoeff());
  const auto P = plant_sparsity_pattern();
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 17; ++j) {
      if (!P(i, j) && std::abs(AB(i, j)) > tol) {
        throw StructureViolation(fmt::format(
            "unexpected nonzero {} at row {} column {}", AB(i, j),
            sys.state_labels[i], j < 11 ? sys.state_labels[j] : sys.input_labels[j - 11]));
      }
    }
  }
}

AugmentedModel augment(const PlantModel& plant) {
  const auto& p = plant.sys;
  const int n = p.num_states(), m = p.num_inputs(), q = p.num_outputs();
  constexpr int ni = AugmentedModel::kNumIntegrals;
  const MatrixXd Cm = plant.Cm(), Dm = plant.Dm();

  MatrixXd A = MatrixXd::Zero(ni + n, ni + n);
  A.block(0, ni, ni, n) = Cm;
  A.block(ni, ni, n, n) = p.A;
  MatrixXd B(ni + n, m);
  B.topRows(ni) = Dm;
  B.bottomRows(n) = p.B;

  // Measured outputs: plant measurements, then integrals; then monitors.
  const int nm = PlantModel::kNumMeasured;
  MatrixXd C = MatrixXd::Zero(q + ni, ni + n);
  MatrixXd D = MatrixXd::Zero(q + ni, m);
  C.block(0, ni, nm, n) = Cm;
  D.topRows(nm) = Dm;
  C.block(nm, 0, ni, ni) = MatrixXd::Identity(ni, ni);
  C.block(nm + ni, ni, q - nm, n) = p.C.bottomRows(q - nm);
  D.bottomRows(q - nm) = p.D.bottomRows(q - nm);

  std::vector<std::string> xs, ys;
  for (int k = 0; k < ni; ++k) xs.push_back("int_" + p.output_labels[k]);
  xs.insert(xs.end(), p.state_labels.begin(), p.state_labels.end());
  ys.insert(ys.end(), p.output_labels.begin(), p.output_labels.begin() + nm);
  ys.insert(ys.end(), xs.begin(), xs.begin() + ni);
  ys.insert(ys.end(), p.output_labels.begin() + nm, p.output_labels.end());

  return AugmentedModel{make_model(A, B, C, D, xs, p.input_labels, ys),
                        plant.form};
}

}  // namespace hvdc
