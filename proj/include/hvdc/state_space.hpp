#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hvdc {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Continuous-time LTI system x' = A x + B u, y = C x + D u with named
/// states, inputs and outputs.
struct StateSpaceModel {
  MatrixXd A;
  MatrixXd B;
  MatrixXd C;
  MatrixXd D;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
  std::vector<std::string> output_labels;

  int num_states() const { return static_cast<int>(A.rows()); }
  int num_inputs() const { return static_cast<int>(B.cols()); }
  int num_outputs() const { return static_cast<int>(C.rows()); }

  /// Throws DimensionMismatch or InvalidParameter (duplicate labels).
  void validate() const;

  int state_index(const std::string& name) const;
  int input_index(const std::string& name) const;
  int output_index(const std::string& name) const;
  bool has_state(const std::string& name) const;
  bool has_output(const std::string& name) const;

  /// Appends an output y_new = c x + d u.
  void add_output(const std::string& name, const Eigen::RowVectorXd& c,
                  const Eigen::RowVectorXd& d);

  /// Returns a copy with states reordered so that new state k is old state
  /// order[k].
  StateSpaceModel permuted(const std::vector<int>& order) const;

  /// Keeps the listed outputs in the given order.
  StateSpaceModel select_outputs(const std::vector<std::string>& names) const;
};

/// Builds a model from matrices and labels and validates it.
StateSpaceModel make_model(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D,
                           std::vector<std::string> states,
                           std::vector<std::string> inputs,
                           std::vector<std::string> outputs);

/// Static gain y = D u with no states.
StateSpaceModel make_gain(const MatrixXd& D, std::vector<std::string> inputs,
                          std::vector<std::string> outputs);

/// First-order rational function (num1 s + num0) / (den1 s + den0).
struct FirstOrderTf {
  double num1 = 0.0;
  double num0 = 1.0;
  double den1 = 1.0;
  double den0 = 1.0;

  std::complex<double> evaluate(std::complex<double> s) const;
  double dc_gain() const { return num0 / den0; }
  double pole() const { return -den0 / den1; }
  /// Direct feedthrough num1 / den1.
  double feedthrough() const { return num1 / den1; }
  /// Exact unit-step response at time t >= 0.
  double step_response(double t) const;
  /// One-state realization with the given labels.
  StateSpaceModel realize(const std::string& state, const std::string& input,
                          const std::string& output) const;
};

/// Frequency response C (sI - A)^-1 B + D at s = j omega.
MatrixXcd frequency_response(const StateSpaceModel& sys, double omega);

/// Steady-state gain -C A^-1 B + D. Throws DegenerateModel if A is singular.
MatrixXd dc_gain(const StateSpaceModel& sys);

/// One summing junction term: gain times a named signal (a block output or
/// an external input).
struct SignalTerm {
  double gain;
  std::string signal;
};

/// Drives one block input by a weighted sum of signals.
struct Junction {
  std::string input;
  std::vector<SignalTerm> terms;
};

/// Interconnects blocks whose inputs are fed by junctions. Block outputs and
/// external inputs share one namespace of signal names. Algebraic loops are
/// resolved exactly, and DegenerateModel is thrown if a loop is ill-posed.
/// Every block input must have a junction, possibly with no terms.
/// The result has the concatenated block states, the external inputs, and
/// every block output.
StateSpaceModel interconnect(const std::vector<StateSpaceModel>& blocks,
                             const std::vector<Junction>& junctions,
                             const std::vector<std::string>& external_inputs);

}  // namespace hvdc
