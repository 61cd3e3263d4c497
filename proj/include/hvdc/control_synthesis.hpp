#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hvdc/grid_assembly.hpp"
#include "hvdc/state_space.hpp"

namespace hvdc {

/// True if every eigenvalue of A with nonnegative real part is controllable
/// from B (Popov-Belevitch-Hautus rank test).
bool is_stabilizable(const MatrixXd& A, const MatrixXd& B);
/// True if every eigenvalue of A with nonnegative real part is observable
/// through C.
bool is_detectable(const MatrixXd& A, const MatrixXd& C);

/// Solves A^T X + X A + Q = 0 by complex Bartels-Stewart.
/// Throws DegenerateModel if the equation is singular.
MatrixXd solve_lyapunov(const MatrixXd& A, const MatrixXd& Q);

/// Real Schur form H = U T U^T with the blocks whose eigenvalues have
/// negative real part moved to the leading positions.
struct OrderedSchur {
  MatrixXd T;
  MatrixXd U;
  int num_selected = 0;
};
OrderedSchur ordered_real_schur(const MatrixXd& H);

struct CareSolution {
  MatrixXd P;
  double residual = 0.0;      ///< relative residual of the Riccati equation
  bool ill_conditioned = false;
  double subspace_condition = 0.0;
  int refinement_steps = 0;
};

/// Relative residual of A^T P + P A + Q - (P B + N) R^-1 (B^T P + N^T).
double care_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                     const MatrixXd& R, const MatrixXd& P,
                     const std::optional<MatrixXd>& N = std::nullopt);

/// Stabilizing solution of the continuous algebraic Riccati equation with
/// an optional cross weight N, by ordered Schur decomposition of the
/// Hamiltonian followed by Newton-Kleinman refinement.
/// Throws NotStabilizable, NotDetectable, NoStableSubspace, InvalidParameter.
CareSolution solve_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                        const MatrixXd& R,
                        const std::optional<MatrixXd>& N = std::nullopt);

/// Newton-Kleinman iteration from a stabilizing initial gain K0.
CareSolution solve_care_newton(const MatrixXd& A, const MatrixXd& B,
                               const MatrixXd& Q, const MatrixXd& R,
                               const MatrixXd& K0, int max_iterations = 100,
                               double tolerance = 1e-13);

/// Stabilizing gain by the Bass construction; requires (A, B) controllable.
MatrixXd bass_stabilizing_gain(const MatrixXd& A, const MatrixXd& B);

/// K = R^-1 (B^T P + N^T).
MatrixXd lqr_gain(const MatrixXd& P, const MatrixXd& B, const MatrixXd& R,
                  const std::optional<MatrixXd>& N = std::nullopt);

/// Cost matrix P_K of a stabilizing gain K: the infinite-horizon cost from
/// x0 is x0^T P_K x0.
MatrixXd lqr_cost_matrix(const MatrixXd& A, const MatrixXd& B,
                         const MatrixXd& Q, const MatrixXd& R,
                         const MatrixXd& K);

/// Largest real part of the spectrum.
double spectral_abscissa(const MatrixXd& A);

/// Weights for the integral LQG design. Q covers the augmented states in
/// their canonical order; R_w the four references; W the reference and
/// disturbance channels; V_n the eight measured outputs.
struct LqgWeights {
  VectorXd Q;
  VectorXd R_w;
  VectorXd W;
  VectorXd V_n;

  static LqgWeights defaults();
  void validate() const;
};

/// Canonical labels of the augmented states addressed by LqgWeights::Q.
const std::vector<std::string>& augmented_weight_labels();

/// Cost matrices (Q, N, R) for an augmented model. A weight whose label is
/// not a state of the model falls on the output with the same label.
struct CostMatrices {
  MatrixXd Q;
  MatrixXd N;
  MatrixXd R;
};
CostMatrices cost_matrices(const AugmentedModel& aug, const LqgWeights& w);

/// Linear time-invariant output-feedback controller. Inputs are plant
/// outputs named by input_labels; outputs are the four references.
struct LinearController {
  MatrixXd Ac, Bc, Cc, Dc;
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
};

struct LqgDesign {
  MatrixXd K;
  MatrixXd L;
  CareSolution control;
  CareSolution filter;
  CostMatrices cost;
  /// Estimator with r = -K x_hat, driven by the measured outputs.
  LinearController controller;
};

/// Steady-state Kalman gain from the dual Riccati equation.
MatrixXd kalman_gain(const MatrixXd& A, const MatrixXd& C, const MatrixXd& W_eff,
                     const MatrixXd& V_n, CareSolution* solution = nullptr);

/// Full LQG synthesis. Throws NotStabilizing if either loop is not Hurwitz.
LqgDesign design_lqg(const AugmentedModel& aug, const LqgWeights& w);

/// Certainty-equivalence closed loop from the disturbances to the measured
/// outputs: A_E - B_rE K with outputs C_E - D_rE K.
StateSpaceModel closed_loop(const AugmentedModel& aug, const MatrixXd& K);

/// Classical PI gains of the conventional strategies.
struct PiGains {
  double gen_kp = 9.0;
  double gen_ki = 6.0;
  double hvdc_kp = 9.0;
  double hvdc_ki = 6.0;
};

/// Signal driving the converter PI loops of the conventional strategy with
/// both-side support.
enum class ConverterPiSignal {
  kConverterQuantities,  ///< Idci to the current reference, Vdcr to the voltage reference
  kFrequency,            ///< fi to the current reference, fr to the voltage reference
};

/// One PI loop r_channel += sign (kp y + ki int y).
struct PiLoop {
  std::string signal;
  int channel = 0;
  double kp = 0.0;
  double ki = 0.0;
  double sign = -1.0;
};

/// PI loops for case 2 or 3. Throws UnknownCase otherwise.
std::vector<PiLoop> build_pi_controller(int case_id, const PiGains& gains,
                                        ConverterPiSignal signal =
                                            ConverterPiSignal::kConverterQuantities);

/// Realizes PI loops as an LTI controller. Loops on the same signal share
/// one integrator.
LinearController realize_pi(const std::vector<PiLoop>& loops);

/// Closed loop of a plant and an output-feedback controller. Inputs are
/// the plant disturbances, followed with noise_inputs by additive noise on
/// each reference (d_*) and each controller measurement (n_*). Outputs are
/// every plant output followed by the applied references. States are the
/// plant states followed by the controller states.
StateSpaceModel close_loop(const StateSpaceModel& plant, int num_references,
                           const LinearController& ctrl, bool noise_inputs = false);

}  // namespace hvdc
