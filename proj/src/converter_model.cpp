#include "hvdc/converter_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hvdc/errors.hpp"

namespace hvdc {
namespace {

constexpr double kPi = std::numbers::pi;

struct TerminalData {
  double V_l, TR, X, V0, I0, mu_table;
};

TerminalData terminal(const HvdcParameters& p, bool rectifier) {
  if (rectifier) return {p.V_lr, p.TR_r, p.X_cr, p.V_dcr0, p.I_dcr0, p.mu_r0};
  return {p.V_li, p.TR_i, p.X_ci, p.V_dci0, p.I_dci0, p.mu_i0};
}

double a1_of(const HvdcParameters& p, const TerminalData& t) {
  return 3.0 * std::sqrt(2.0) * p.N * t.V_l / (kPi * t.TR);
}
double a2_of(const HvdcParameters& p, const TerminalData& t) {
  return 3.0 * t.X * p.N / kPi;
}
double a4_of(const TerminalData& t) {
  return std::sqrt(2.0) * t.X / (t.V_l / t.TR);
}
double a5_of(const HvdcParameters& p, const TerminalData& t) {
  return 3.0 * p.N * t.V_l * t.V_l / (4.0 * kPi * t.X * t.TR * t.TR);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(fmt::format("{} must be positive and finite, got {}", name, v));
  }
}

TerminalPoint solve_terminal(const HvdcParameters& p, bool rectifier,
                             OverlapPolicy policy) {
  const TerminalData t = terminal(p, rectifier);
  const double a1 = a1_of(p, t), a2 = a2_of(p, t);
  // f is strictly decreasing on (0, pi/2).
  auto f = [&](double beta) { return a1 * std::cos(beta) - a2 * t.I0 - t.V0; };
  double lo = 0.0, hi = kPi / 2.0;
  if (f(lo) < 0.0 || f(hi) > 0.0) {
    throw NoSolution(fmt::format(
        "{}: no angle in (0, pi/2) reproduces V_dc0 = {} V at I_dc0 = {} A",
        rectifier ? "rectifier" : "inverter", t.V0, t.I0));
  }
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  TerminalPoint tp;
  tp.beta0 = 0.5 * (lo + hi);
  tp.V_dc0 = t.V0;
  tp.I_dc0 = t.I0;
  tp.mu_table = t.mu_table;
  const double arg = std::cos(tp.beta0) - a4_of(t) * t.I0;
  if (arg < -1.0 || arg > 1.0) {
    throw NoSolution("commutation equation has no real overlap angle");
  }
  tp.mu_solved = std::acos(arg) - tp.beta0;
  const double mismatch = std::abs(tp.mu_solved - tp.mu_table);
  if (policy == OverlapPolicy::kStrict && mismatch > 1e-3) {
    throw InconsistentOverlap(
        fmt::format("{}: listed overlap angle {:.6f} rad, commutation equation "
                    "gives {:.6f} rad",
                    rectifier ? "rectifier" : "inverter", tp.mu_table,
                    tp.mu_solved),
        tp.mu_table, tp.mu_solved);
  }
  tp.mu_used = policy == OverlapPolicy::kTable ? tp.mu_table : tp.mu_solved;
  return tp;
}

TerminalCoefficients terminal_coefficients(const HvdcParameters& p,
                                           const TerminalData& t,
                                           double beta0, double mu0,
                                           double H0) {
  TerminalCoefficients c;
  c.a1 = a1_of(p, t);
  c.a2 = a2_of(p, t);
  c.a3 = 1.0 / H0;
  c.a4 = a4_of(t);
  c.a5 = a5_of(p, t);
  c.b1 = -c.a1 * std::sin(beta0);
  c.b2 = -std::sin(beta0) + std::sin(beta0 + mu0);
  c.b3 = std::sin(beta0 + mu0);
  c.b4 = c.a5 * (-2.0 * std::sin(2.0 * beta0) + 2.0 * std::sin(2.0 * (beta0 + mu0)));
  c.b5 = c.a5 * 2.0 * std::sin(2.0 * (beta0 + mu0));
  return c;
}

void check_nonzero(double v, double scale, const char* name) {
  if (!(std::abs(v) > 1e-12 * std::max(scale, 1e-300))) {
    throw DegenerateModel(fmt::format("coefficient {} vanishes ({})", name, v));
  }
}

}  // namespace

void HvdcParameters::validate() const {
  if (N < 1) throw InvalidParameter("N must be at least 1");
  require_positive(TR_r, "TR_r");
  require_positive(TR_i, "TR_i");
  require_positive(V_lr, "V_lr");
  require_positive(V_li, "V_li");
  require_positive(X_cr, "X_cr");
  require_positive(X_ci, "X_ci");
  require_positive(V_dcr0, "V_dcr0");
  require_positive(V_dci0, "V_dci0");
  require_positive(I_dcr0, "I_dcr0");
  require_positive(I_dci0, "I_dci0");
  require_positive(R, "R");
  require_positive(L, "L");
  require_positive(C, "C");
  require_positive(T_k, "T_k");
  require_positive(T_r, "T_r");
  require_positive(T_i, "T_i");
  require_positive(k_pr, "k_pr");
  require_positive(k_ir, "k_ir");
  require_positive(k_pi, "k_pi");
  require_positive(k_ii, "k_ii");
  for (double mu : {mu_r0, mu_i0}) {
    if (!(mu > 0.0 && mu < kPi / 2.0)) {
      throw InvalidParameter("overlap angles must lie in (0, pi/2)");
    }
  }
  const double pr = V_dcr0 * I_dcr0, pi = V_dci0 * I_dci0;
  if (std::abs(pr - pi) > 0.1 * pr) {
    throw InvalidParameter("rectifier and inverter nominal powers differ by more than 10%");
  }
}

TerminalCoefficients terminal_coefficients(const HvdcParameters& p, bool rectifier,
                                           double beta0, double mu0) {
  const TerminalData t = terminal(p, rectifier);
  return terminal_coefficients(p, t, beta0, mu0, rectifier ? t.V0 : t.I0);
}

OperatingPoint solve_operating_point(const HvdcParameters& p,
                                     OverlapPolicy policy) {
  p.validate();
  OperatingPoint op;
  op.rectifier = solve_terminal(p, true, policy);
  op.inverter = solve_terminal(p, false, policy);
  return op;
}

double terminal_voltage_residual(const HvdcParameters& p, bool rectifier,
                                 double beta, double I, double V) {
  const TerminalData t = terminal(p, rectifier);
  return (a1_of(p, t) * std::cos(beta) - a2_of(p, t) * I - V) / V;
}

double commutation_residual(const HvdcParameters& p, bool rectifier,
                            double beta, double mu, double I) {
  const TerminalData t = terminal(p, rectifier);
  return a4_of(t) * I - std::cos(beta) + std::cos(beta + mu);
}

double converter_power_from_angles(const HvdcParameters& p, bool rectifier,
                                   double beta, double mu) {
  const TerminalData t = terminal(p, rectifier);
  return a5_of(p, t) * (std::cos(2.0 * beta) - std::cos(2.0 * (beta + mu)));
}

LinearizationCoefficients compute_coefficients(const HvdcParameters& p,
                                               const OperatingPoint& op) {
  const TerminalData tr = terminal(p, true), ti = terminal(p, false);
  LinearizationCoefficients c;
  // The rectifier regulates voltage and the inverter regulates current.
  c.r = terminal_coefficients(p, tr, op.rectifier.beta0, op.rectifier.mu_used,
                              op.rectifier.V_dc0);
  c.i = terminal_coefficients(p, ti, op.inverter.beta0, op.inverter.mu_used,
                              op.inverter.I_dc0);
  const double Vi0 = op.inverter.V_dc0, Ii0 = op.inverter.I_dc0;
  const double Vr0 = op.rectifier.V_dc0, Ir0 = op.rectifier.I_dc0;
  const auto& a = c.i;
  const auto& b = c.r;

  c.c1i = Vi0 - a.a2 * Ii0;
  c.c2i = a.b2 * a.b5 - a.b3 * a.b4;
  c.c1r = b.b1 * b.b3 * Vr0 - b.a4 * b.b1 * b.b5 - b.a2 * b.b3 * b.b4 +
          b.a2 * b.b2 * b.b5;
  c.c2r = b.b3 * Vr0 - b.a4 * b.b5 - b.a2 * b.b3 * Ir0;

  const double gi = a.a3 * (a.b1 * a.b3 + c.c2i);
  c.m3 = p.k_pi * gi;
  c.m4 = p.k_ii * gi;
  c.m2 = c.m4;
  c.m1 = a.a4 * a.b5 - a.b3 * c.c1i + c.m3;

  c.n3 = b.a3 * c.c1r * p.k_pr;
  c.n2 = b.a3 * c.c1r * p.k_ir;
  c.n1 = c.n3 - c.c2r;

  const double mscale = std::max({std::abs(a.a4 * a.b5), std::abs(a.b3 * c.c1i),
                                  std::abs(c.m3), std::abs(c.m4)});
  const double nscale = std::max({std::abs(c.n3), std::abs(c.c2r), std::abs(c.n2)});
  check_nonzero(c.m1, mscale, "m1");
  check_nonzero(c.m2, mscale, "m2");
  check_nonzero(c.n1, nscale, "n1");
  check_nonzero(c.n2, nscale, "n2");
  return c;
}

ConverterLoop inverter_current_tf(const LinearizationCoefficients& c) {
  ConverterLoop loop;
  loop.exact = {c.m3, c.m4, c.m1, c.m2};
  loop.simplified = {0.0, 1.0, c.m1 / c.m2, 1.0};
  loop.validity_ratio = c.m3 / c.m1;
  loop.approximation_valid = std::abs(loop.validity_ratio) < 0.01;
  return loop;
}

ConverterLoop rectifier_voltage_tf(const LinearizationCoefficients& c) {
  ConverterLoop loop;
  loop.exact = {c.n3, c.n2, c.n1, c.n2};
  loop.simplified = {0.0, 1.0, c.n1 / c.n2, 1.0};
  loop.validity_ratio = c.n3 / c.n1;
  loop.approximation_valid = std::abs(loop.validity_ratio) < 0.01;
  return loop;
}

std::string to_string(DcLinkForm form) {
  return form == DcLinkForm::kOriginal ? "original" : "simplified";
}

DcLinkForm dc_link_form_from_string(const std::string& s) {
  if (s == "original") return DcLinkForm::kOriginal;
  if (s == "simplified") return DcLinkForm::kSimplified;
  throw InvalidParameter(fmt::format("unknown DC-link form '{}'", s));
}

StateSpaceModel build_dc_link(const DcLinkParameters& p, DcLinkForm form) {
  if (form == DcLinkForm::kSimplified) {
    require_positive(p.T_k, "T_k");
    if (p.R < 0.0) throw InvalidParameter("R must be nonnegative");
    MatrixXd A(1, 1), B(1, 2), C(2, 1), D(2, 2);
    A << -1.0 / p.T_k;
    B << 0.0, -2.0 * p.R / p.T_k;
    C << 1.0, 0.0;
    D << 1.0, 0.0,
         0.0, 1.0;
    return make_model(A, B, C, D, {"Vdrop"}, {"Vdcr", "Idci"}, {"Vdci", "Idcr"});
  }
  require_positive(p.L, "L");
  require_positive(p.C, "C");
  if (p.R < 0.0) throw InvalidParameter("R must be nonnegative");
  // L sigma' = 2 (Vdcr - Vm) - R sigma, C Vm' = sigma - 2 Idci,
  // Vdci = 2 Vm - Vdcr, Idcr = sigma - Idci.
  MatrixXd A(2, 2), B(2, 2), C(2, 2), D(2, 2);
  A << -p.R / p.L, -2.0 / p.L,
       1.0 / p.C, 0.0;
  B << 2.0 / p.L, 0.0,
       0.0, -2.0 / p.C;
  C << 0.0, 2.0,
       1.0, 0.0;
  D << -1.0, 0.0,
       0.0, -1.0;
  return make_model(A, B, C, D, {"dc_sigma", "dc_mid"}, {"Vdcr", "Idci"},
                    {"Vdci", "Idcr"});
}

PowerMaps power_linearization(const NominalPoint& n) {
  PowerMaps m;
  m.inverter << 0.0, n.I_dci0, n.V_dci0, 0.0;
  m.rectifier << n.I_dcr0, 0.0, 0.0, n.V_dcr0;
  return m;
}

void append_power_outputs(StateSpaceModel& sys, const NominalPoint& nominal) {
  const PowerMaps maps = power_linearization(nominal);
  const std::vector<std::string> basis = {"Vdcr", "Vdci", "Idci", "Idcr"};
  auto combine = [&](const Eigen::RowVector4d& w, Eigen::RowVectorXd& c,
                     Eigen::RowVectorXd& d) {
    c = Eigen::RowVectorXd::Zero(sys.num_states());
    d = Eigen::RowVectorXd::Zero(sys.num_inputs());
    for (int k = 0; k < 4; ++k) {
      const int j = sys.output_index(basis[k]);
      c += w(k) * sys.C.row(j);
      d += w(k) * sys.D.row(j);
    }
  };
  Eigen::RowVectorXd c, d;
  combine(Eigen::RowVector4d(-1.0, 1.0, 0.0, 0.0), c, d);
  sys.add_output("Vdrop", c, d);
  combine(maps.inverter, c, d);
  sys.add_output("Pdci", c, d);
  combine(maps.rectifier, c, d);
  sys.add_output("Pdcr", c, d);
}

HvdcPerUnit to_per_unit(const HvdcParameters& p, const PerUnitBase& base,
                        OverlapPolicy policy, LagSource lag) {
  require_positive(base.S_base, "S_base");
  require_positive(base.V_base, "V_base");
  const OperatingPoint op = solve_operating_point(p, policy);
  const LinearizationCoefficients c = compute_coefficients(p, op);
  HvdcPerUnit hv;
  hv.nominal.V_dcr0 = p.V_dcr0 / base.V_base;
  hv.nominal.V_dci0 = p.V_dci0 / base.V_base;
  hv.nominal.I_dcr0 = p.I_dcr0 / base.I_base();
  hv.nominal.I_dci0 = p.I_dci0 / base.I_base();
  hv.dc_link.R = p.R / base.Z_base();
  hv.dc_link.L = p.L / base.Z_base();
  hv.dc_link.C = p.C * base.Z_base();
  hv.dc_link.T_k = p.T_k;
  hv.inverter = inverter_current_tf(c);
  hv.rectifier = rectifier_voltage_tf(c);
  if (lag == LagSource::kTable) {
    hv.inverter.simplified.den1 = p.T_i;
    hv.rectifier.simplified.den1 = p.T_r;
  }
  return hv;
}

StateSpaceModel build_hvdc_model(const HvdcPerUnit& hv, DcLinkForm form) {
  std::vector<StateSpaceModel> blocks;
  if (form == DcLinkForm::kOriginal) {
    blocks.push_back(hv.inverter.exact.realize("inv_loop", "Idci_cmd", "Idci"));
    blocks.push_back(hv.rectifier.exact.realize("rec_loop", "Vdcr_cmd", "Vdcr"));
  } else {
    // States equal the regulated quantities themselves.
    auto lag = [](const FirstOrderTf& tf, const std::string& in,
                  const std::string& out) {
      MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
      A << -tf.den0 / tf.den1;
      B << tf.num0 / tf.den1;
      C << 1.0;
      D << 0.0;
      return make_model(A, B, C, D, {out}, {in}, {out});
    };
    blocks.push_back(lag(hv.inverter.simplified, "Idci_cmd", "Idci"));
    blocks.push_back(lag(hv.rectifier.simplified, "Vdcr_cmd", "Vdcr"));
  }
  StateSpaceModel link = build_dc_link(hv.dc_link, form);
  link.input_labels = {"link_Vdcr", "link_Idci"};
  blocks.push_back(link);

  std::vector<Junction> wiring = {
      {"Idci_cmd", {{1.0, "Idci_ref"}}},
      {"Vdcr_cmd", {{1.0, "Vdcr_ref"}}},
      {"link_Vdcr", {{1.0, "Vdcr"}}},
      {"link_Idci", {{1.0, "Idci"}}},
  };
  StateSpaceModel sys = interconnect(blocks, wiring, {"Vdcr_ref", "Idci_ref"});
  append_power_outputs(sys, hv.nominal);
  return sys.select_outputs({"Pdcr", "Pdci", "Vdcr", "Vdci", "Idci", "Idcr", "Vdrop"});
}

}  // namespace hvdc
