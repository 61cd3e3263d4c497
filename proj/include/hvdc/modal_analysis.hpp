#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hvdc/state_space.hpp"
#include "hvdc/system_config.hpp"

namespace hvdc {

enum class ModeKind { kDominant, kOscillatory, kFast };

std::string to_string(ModeKind kind);

/// Spectrum sorted by decreasing real part; conjugate pairs are adjacent
/// with the positive imaginary part first.
struct ModeSet {
  std::vector<std::complex<double>> eigenvalues;
  /// -Re/|lambda| for complex pairs, 1 for stable real modes, -1 for
  /// unstable real modes, 0 at the origin.
  std::vector<double> damping_ratios;
  std::vector<ModeKind> kinds;
  int dominant = -1;  ///< -1 if no eigenvalue has a negative real part

  bool hurwitz() const;
  double spectral_abscissa() const;
  /// Smallest damping ratio over the oscillatory modes (1 if none).
  double min_damping() const;
  /// Real part of the stable real eigenvalue nearest the imaginary axis.
  std::optional<double> dominant_real_pole() const;
  std::complex<double> dominant_eigenvalue() const;
};

/// Dense eigen-decomposition and classification. Throws NonFinite.
ModeSet modes(const MatrixXd& A);
ModeSet modes(const StateSpaceModel& model);

/// Closed-loop spectrum of the LQG design for a configuration
/// (certainty-equivalence loop A_E - B_rE K).
struct SynthesisPoint {
  MatrixXd K;
  ModeSet modes;
  double control_residual = 0.0;
  double filter_residual = 0.0;
};
SynthesisPoint synthesize_point(const SystemConfig& cfg, DcLinkForm form);

struct SweepResult {
  std::string parameter;
  std::vector<double> values;
  std::vector<ModeSet> modes;      ///< empty ModeSet where synthesis failed
  std::vector<MatrixXd> gains;     ///< empty matrix where synthesis failed
  std::vector<std::string> errors; ///< empty string where synthesis succeeded

  bool ok(std::size_t k) const { return errors[k].empty(); }
};

/// Logarithmically spaced grid; one point returns {lo}.
std::vector<double> log_grid(double lo, double hi, int points);

/// Rebuilds the model and re-synthesizes K at each grid value. Failures
/// are recorded per point and the sweep continues.
SweepResult root_locus(const SystemConfig& base, const std::string& parameter,
                       const std::vector<double>& values);
SweepResult root_locus(const SystemConfig& base, const std::string& parameter,
                       double lo, double hi, int points = 25);

/// Reorders each point's eigenvalues so that entry j continues branch j of
/// the previous successful point (greedy nearest neighbour).
std::vector<std::vector<std::complex<double>>> pair_branches(const SweepResult& sweep);

/// CSV with header param_value,re,im,damping,is_dominant; rows follow the
/// paired branch order.
void write_locus_csv(std::ostream& os, const SweepResult& sweep);

/// True if the sequence never increases by more than tol (and the
/// non-decreasing counterpart).
bool non_increasing(const std::vector<double>& v, double tol = 1e-6);
bool non_decreasing(const std::vector<double>& v, double tol = 1e-6);

}  // namespace hvdc
