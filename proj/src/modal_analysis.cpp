#include "hvdc/modal_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "hvdc/errors.hpp"

namespace hvdc {
namespace {

using cd = std::complex<double>;

bool is_complex(cd l) { return std::abs(l.imag()) > 1e-9 * std::max(1.0, std::abs(l)); }

double damping_of(cd l) {
  const double mag = std::abs(l);
  if (mag == 0.0) return 0.0;
  if (!is_complex(l)) return l.real() < 0.0 ? 1.0 : -1.0;
  return -l.real() / mag;
}

}  // namespace

std::string to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::kDominant: return "dominant";
    case ModeKind::kOscillatory: return "oscillatory";
    case ModeKind::kFast: return "fast";
  }
  return "unknown";
}

bool ModeSet::hurwitz() const { return spectral_abscissa() < 0.0; }

double ModeSet::spectral_abscissa() const {
  double a = -std::numeric_limits<double>::infinity();
  for (const auto& l : eigenvalues) a = std::max(a, l.real());
  return a;
}

double ModeSet::min_damping() const {
  double z = 1.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (is_complex(eigenvalues[k])) z = std::min(z, damping_ratios[k]);
  }
  return z;
}

std::optional<double> ModeSet::dominant_real_pole() const {
  std::optional<double> best;
  for (const auto& l : eigenvalues) {
    if (is_complex(l) || !(l.real() < 0.0)) continue;
    if (!best || l.real() > *best) best = l.real();
  }
  return best;
}

cd ModeSet::dominant_eigenvalue() const {
  if (dominant < 0) throw NoSolution("spectrum has no stable eigenvalue");
  return eigenvalues[dominant];
}

ModeSet modes(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("modes needs a square matrix");
  if (!A.allFinite()) throw NonFinite("state matrix has non-finite entries");
  ModeSet ms;
  if (A.rows() == 0) return ms;
  Eigen::EigenSolver<MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) throw NoSolution("eigen-decomposition failed");
  const VectorXcd ev = es.eigenvalues();
  ms.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  // Clean conjugate pairs so that they sort adjacently.
  for (auto& l : ms.eigenvalues) {
    if (!is_complex(l)) l = cd(l.real(), 0.0);
  }
  std::sort(ms.eigenvalues.begin(), ms.eigenvalues.end(), [](cd a, cd b) {
    if (a.real() != b.real()) return a.real() > b.real();
    if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
    return a.imag() > b.imag();
  });
  for (const auto& l : ms.eigenvalues) {
    ms.damping_ratios.push_back(damping_of(l));
    ms.kinds.push_back(is_complex(l) ? ModeKind::kOscillatory : ModeKind::kFast);
  }
  for (std::size_t k = 0; k < ms.eigenvalues.size(); ++k) {
    if (ms.eigenvalues[k].real() < 0.0) {
      ms.dominant = static_cast<int>(k);
      break;
    }
  }
  if (ms.dominant >= 0) {
    ms.kinds[ms.dominant] = ModeKind::kDominant;
    // Its conjugate shares the label.
    const cd d = ms.eigenvalues[ms.dominant];
    const std::size_t next = static_cast<std::size_t>(ms.dominant) + 1;
    if (is_complex(d) && next < ms.eigenvalues.size() &&
        ms.eigenvalues[next] == std::conj(d)) {
      ms.kinds[next] = ModeKind::kDominant;
    }
  }
  return ms;
}

ModeSet modes(const StateSpaceModel& model) { return modes(model.A); }

SynthesisPoint synthesize_point(const SystemConfig& cfg, DcLinkForm form) {
  const PlantModel plant = build_plant(cfg, cfg.pfc, form);
  const AugmentedModel aug = augment(plant);
  const LqgDesign d = design_lqg(aug, cfg.weights);
  SynthesisPoint pt;
  pt.K = d.K;
  pt.modes = modes(MatrixXd(aug.A() - aug.Br() * d.K));
  pt.control_residual = d.control.residual;
  pt.filter_residual = d.filter.residual;
  return pt;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (points < 1) throw InvalidParameter("a sweep needs at least one point");
  if (!(lo > 0.0) || !std::isfinite(hi)) throw InvalidParameter("sweep bounds must be positive");
  if (points == 1) return {lo};
  if (!(hi > lo)) throw InvalidParameter("sweep range must be increasing");
  std::vector<double> v(points);
  const double a = std::log(lo), b = std::log(hi);
  for (int k = 0; k < points; ++k) {
    v[k] = std::exp(a + (b - a) * k / (points - 1));
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

SweepResult root_locus(const SystemConfig& base, const std::string& parameter,
                       const std::vector<double>& values) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (!(values[k] > values[k - 1])) throw InvalidParameter("sweep grid must be strictly increasing");
  }
  SweepResult out;
  out.parameter = parameter;
  const DcLinkForm form = sweep_form(parameter, base.form);
  for (double v : values) {
    SystemConfig cfg = base;
    set_parameter(cfg, parameter, v);
    out.values.push_back(v);
    try {
      SynthesisPoint pt = synthesize_point(cfg, form);
      out.modes.push_back(std::move(pt.modes));
      out.gains.push_back(std::move(pt.K));
      out.errors.emplace_back();
    } catch (const Error& e) {
      out.modes.emplace_back();
      out.gains.emplace_back();
      out.errors.push_back(fmt::format("synthesis failed: {}", e.what()));
    }
  }
  return out;
}

SweepResult root_locus(const SystemConfig& base, const std::string& parameter,
                       double lo, double hi, int points) {
  return root_locus(base, parameter, log_grid(lo, hi, points));
}

std::vector<std::vector<cd>> pair_branches(const SweepResult& sweep) {
  std::vector<std::vector<cd>> out(sweep.values.size());
  const std::vector<cd>* prev = nullptr;
  for (std::size_t k = 0; k < sweep.values.size(); ++k) {
    if (!sweep.ok(k)) continue;
    const auto& cur = sweep.modes[k].eigenvalues;
    if (!prev || prev->size() != cur.size()) {
      out[k] = cur;
    } else {
      std::vector<bool> used(cur.size(), false);
      out[k].resize(cur.size());
      for (std::size_t j = 0; j < prev->size(); ++j) {
        std::size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cur.size(); ++i) {
          if (used[i]) continue;
          const double d = std::abs(cur[i] - (*prev)[j]);
          if (d < dist) {
            dist = d;
            best = i;
          }
        }
        used[best] = true;
        out[k][j] = cur[best];
      }
    }
    prev = &out[k];
  }
  return out;
}

void write_locus_csv(std::ostream& os, const SweepResult& sweep) {
  const auto branches = pair_branches(sweep);
  os << "param_value,re,im,damping,is_dominant\n";
  for (std::size_t k = 0; k < sweep.values.size(); ++k) {
    if (!sweep.ok(k)) continue;
    const ModeSet& ms = sweep.modes[k];
    const cd dom = ms.dominant >= 0 ? ms.eigenvalues[ms.dominant] : cd(NAN, NAN);
    for (const cd& l : branches[k]) {
      const bool is_dom = l == dom;
      os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{}\n", sweep.values[k], l.real(),
                        l.imag(), damping_of(l), is_dom ? 1 : 0);
    }
  }
}

bool non_increasing(const std::vector<double>& v, double tol) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1] + tol * std::max(1.0, std::abs(v[k - 1]))) return false;
  }
  return true;
}

bool non_decreasing(const std::vector<double>& v, double tol) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] < v[k - 1] - tol * std::max(1.0, std::abs(v[k - 1]))) return false;
  }
  return true;
}

}  // namespace hvdc
