#include "hvdc/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "hvdc/errors.hpp"

namespace hvdc {
namespace {

int find_label(const std::vector<std::string>& labels, const std::string& name,
               const char* kind) {
  auto it = std::find(labels.begin(), labels.end(), name);
  if (it == labels.end()) {
    throw InvalidParameter(fmt::format("unknown {} '{}'", kind, name));
  }
  return static_cast<int>(it - labels.begin());
}

void check_unique(const std::vector<std::string>& labels, const char* kind) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw InvalidParameter(fmt::format("duplicate {} label '{}'", kind, l));
    }
  }
}

}  // namespace

void StateSpaceModel::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n ||
      D.rows() != C.rows() || D.cols() != B.cols()) {
    throw DimensionMismatch(fmt::format(
        "inconsistent dimensions A {}x{}, B {}x{}, C {}x{}, D {}x{}", A.rows(),
        A.cols(), B.rows(), B.cols(), C.rows(), C.cols(), D.rows(), D.cols()));
  }
  if (static_cast<Eigen::Index>(state_labels.size()) != n ||
      static_cast<Eigen::Index>(input_labels.size()) != B.cols() ||
      static_cast<Eigen::Index>(output_labels.size()) != C.rows()) {
    throw DimensionMismatch("label counts do not match matrix dimensions");
  }
  check_unique(state_labels, "state");
  check_unique(input_labels, "input");
  check_unique(output_labels, "output");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
    throw NonFinite("state-space matrices contain non-finite entries");
  }
}

int StateSpaceModel::state_index(const std::string& name) const {
  return find_label(state_labels, name, "state");
}
int StateSpaceModel::input_index(const std::string& name) const {
  return find_label(input_labels, name, "input");
}
int StateSpaceModel::output_index(const std::string& name) const {
  return find_label(output_labels, name, "output");
}
bool StateSpaceModel::has_state(const std::string& name) const {
  return std::find(state_labels.begin(), state_labels.end(), name) !=
         state_labels.end();
}
bool StateSpaceModel::has_output(const std::string& name) const {
  return std::find(output_labels.begin(), output_labels.end(), name) !=
         output_labels.end();
}

void StateSpaceModel::add_output(const std::string& name,
                                 const Eigen::RowVectorXd& c,
                                 const Eigen::RowVectorXd& d) {
  if (c.size() != A.rows() || d.size() != B.cols()) {
    throw DimensionMismatch("add_output: row sizes do not match model");
  }
  if (has_output(name)) {
    throw InvalidParameter(fmt::format("duplicate output label '{}'", name));
  }
  C.conservativeResize(C.rows() + 1, Eigen::NoChange);
  C.row(C.rows() - 1) = c;
  D.conservativeResize(D.rows() + 1, Eigen::NoChange);
  D.row(D.rows() - 1) = d;
  output_labels.push_back(name);
}

StateSpaceModel StateSpaceModel::permuted(const std::vector<int>& order) const {
  const int n = num_states();
  if (static_cast<int>(order.size()) != n) {
    throw DimensionMismatch("permutation size does not match state count");
  }
  MatrixXd T = MatrixXd::Zero(n, n);  // x_new = T x_old
  std::vector<bool> used(n, false);
  for (int k = 0; k < n; ++k) {
    if (order[k] < 0 || order[k] >= n || used[order[k]]) {
      throw InvalidParameter("state order is not a permutation");
    }
    used[order[k]] = true;
    T(k, order[k]) = 1.0;
  }
  StateSpaceModel out = *this;
  out.A = T * A * T.transpose();
  out.B = T * B;
  out.C = C * T.transpose();
  for (int k = 0; k < n; ++k) out.state_labels[k] = state_labels[order[k]];
  return out;
}

StateSpaceModel StateSpaceModel::select_outputs(
    const std::vector<std::string>& names) const {
  StateSpaceModel out = *this;
  out.C.resize(static_cast<Eigen::Index>(names.size()), A.rows());
  out.D.resize(static_cast<Eigen::Index>(names.size()), B.cols());
  for (size_t k = 0; k < names.size(); ++k) {
    const int j = output_index(names[k]);
    out.C.row(k) = C.row(j);
    out.D.row(k) = D.row(j);
  }
  out.output_labels = names;
  return out;
}

StateSpaceModel make_model(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D,
                           std::vector<std::string> states,
                           std::vector<std::string> inputs,
                           std::vector<std::string> outputs) {
  StateSpaceModel m{std::move(A),      std::move(B),      std::move(C),
                    std::move(D),      std::move(states), std::move(inputs),
                    std::move(outputs)};
  m.validate();
  return m;
}

StateSpaceModel make_gain(const MatrixXd& D, std::vector<std::string> inputs,
                          std::vector<std::string> outputs) {
  return make_model(MatrixXd(0, 0), MatrixXd(0, D.cols()),
                    MatrixXd(D.rows(), 0), D, {}, std::move(inputs),
                    std::move(outputs));
}

std::complex<double> FirstOrderTf::evaluate(std::complex<double> s) const {
  return (num1 * s + num0) / (den1 * s + den0);
}

double FirstOrderTf::step_response(double t) const {
  // y(t) = g + (d - g) exp(p t) with g the DC gain and d the feedthrough.
  if (den1 == 0.0) return num0 / den0;
  const double g = dc_gain();
  const double d = feedthrough();
  return g + (d - g) * std::exp(pole() * t);
}

StateSpaceModel FirstOrderTf::realize(const std::string& state,
                                      const std::string& input,
                                      const std::string& output) const {
  if (den1 == 0.0) throw DegenerateModel("first-order denominator has no s term");
  const double d = num1 / den1;
  const double a = -den0 / den1;
  const double c = (num0 - d * den0) / den1;
  MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << a;
  B << 1.0;
  C << c;
  D << d;
  return make_model(A, B, C, D, {state}, {input}, {output});
}

MatrixXcd frequency_response(const StateSpaceModel& sys, double omega) {
  const int n = sys.num_states();
  const std::complex<double> s(0.0, omega);
  MatrixXcd M = s * MatrixXcd::Identity(n, n) - sys.A.cast<std::complex<double>>();
  MatrixXcd X = M.partialPivLu().solve(sys.B.cast<std::complex<double>>());
  return sys.C.cast<std::complex<double>>() * X + sys.D.cast<std::complex<double>>();
}

MatrixXd dc_gain(const StateSpaceModel& sys) {
  if (sys.num_states() == 0) return sys.D;
  Eigen::FullPivLU<MatrixXd> lu(sys.A);
  if (!lu.isInvertible()) throw DegenerateModel("dc_gain: A is singular");
  return sys.D - sys.C * lu.solve(sys.B);
}

StateSpaceModel interconnect(const std::vector<StateSpaceModel>& blocks,
                             const std::vector<Junction>& junctions,
                             const std::vector<std::string>& external_inputs) {
  int nx = 0, nu = 0, ny = 0;
  for (const auto& b : blocks) {
    b.validate();
    nx += b.num_states();
    nu += b.num_inputs();
    ny += b.num_outputs();
  }
  MatrixXd A = MatrixXd::Zero(nx, nx), B = MatrixXd::Zero(nx, nu);
  MatrixXd C = MatrixXd::Zero(ny, nx), D = MatrixXd::Zero(ny, nu);
  std::vector<std::string> xs, us, ys;
  int ox = 0, ou = 0, oy = 0;
  for (const auto& b : blocks) {
    const int n = b.num_states(), m = b.num_inputs(), p = b.num_outputs();
    A.block(ox, ox, n, n) = b.A;
    B.block(ox, ou, n, m) = b.B;
    C.block(oy, ox, p, n) = b.C;
    D.block(oy, ou, p, m) = b.D;
    xs.insert(xs.end(), b.state_labels.begin(), b.state_labels.end());
    us.insert(us.end(), b.input_labels.begin(), b.input_labels.end());
    ys.insert(ys.end(), b.output_labels.begin(), b.output_labels.end());
    ox += n;
    ou += m;
    oy += p;
  }
  check_unique(ys, "block output");
  check_unique(us, "block input");

  std::map<std::string, int> y_index, w_index;
  for (int k = 0; k < ny; ++k) y_index[ys[k]] = k;
  for (size_t k = 0; k < external_inputs.size(); ++k) {
    if (y_index.count(external_inputs[k])) {
      throw InvalidParameter(fmt::format(
          "external input '{}' collides with a block output", external_inputs[k]));
    }
    w_index[external_inputs[k]] = static_cast<int>(k);
  }
  const int nw = static_cast<int>(external_inputs.size());

  // u = F y + G w.
  MatrixXd F = MatrixXd::Zero(nu, ny), G = MatrixXd::Zero(nu, nw);
  std::vector<bool> wired(nu, false);
  for (const auto& j : junctions) {
    const int k = find_label(us, j.input, "block input");
    if (wired[k]) {
      throw InvalidParameter(fmt::format("input '{}' wired twice", j.input));
    }
    wired[k] = true;
    for (const auto& t : j.terms) {
      if (auto it = y_index.find(t.signal); it != y_index.end()) {
        F(k, it->second) += t.gain;
      } else if (auto iw = w_index.find(t.signal); iw != w_index.end()) {
        G(k, iw->second) += t.gain;
      } else {
        throw InvalidParameter(fmt::format("unknown signal '{}'", t.signal));
      }
    }
  }
  for (int k = 0; k < nu; ++k) {
    if (!wired[k]) {
      throw InvalidParameter(fmt::format("input '{}' has no junction", us[k]));
    }
  }

  // y = C x + D (F y + G w)  =>  y = (I - D F)^-1 (C x + D G w).
  const MatrixXd loop = MatrixXd::Identity(ny, ny) - D * F;
  Eigen::FullPivLU<MatrixXd> lu(loop);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) {
    throw DegenerateModel("interconnect: algebraic loop is ill-posed");
  }
  const MatrixXd Cy = lu.solve(C);
  const MatrixXd Dy = lu.solve(D * G);

  StateSpaceModel out;
  out.A = A + B * F * Cy;
  out.B = B * (F * Dy + G);
  out.C = Cy;
  out.D = Dy;
  out.state_labels = xs;
  out.input_labels = external_inputs;
  out.output_labels = ys;
  out.validate();
  return out;
}

}  // namespace hvdc
