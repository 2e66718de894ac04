#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "dscat/model.hpp"

namespace dscat {

class MatchingDegenerateError : public std::runtime_error {
 public:
  explicit MatchingDegenerateError(double lambda);
  double lambda;
};

/// |S| threshold below which the per-lambda scattering matrix is flagged
/// non-invertible; matched to the singularity-scan threshold scale.
inline constexpr double kInvertibilityThreshold = 1e-3;

/// Per-channel scattering coefficient S_ell(lambda) of (H, H0): the regular
/// solution is integrated through the interaction region (RK4, split at
/// potential breakpoints) and matched to alpha h^- + beta h^+; S = beta/alpha,
/// normalized so the free model gives S = 1. |S| <= 1 for W >= 0.
/// step <= 0 selects the default grid-h/2 step.
std::complex<double> scattering_coefficient(const OpticalModel& model,
                                            const Channel& ch, double step = 0.0);

/// Independent route: Lippmann-Schwinger solve of the regular solution on the
/// grid and the Kuroda-type quadrature S = 1 / (1 + (2i/k) <s, U psi>).
/// Cross-check only, not the production path.
std::complex<double> scattering_coefficient_integral(const OpticalModel& model,
                                                     const Channel& ch);

struct ScatteringEntry {
  double lambda;
  int ell;
  std::complex<double> s;
  double abs_s;
};

struct ScatteringProfile {
  std::vector<double> lambdas;
  int ell_max = 0;
  std::vector<ScatteringEntry> entries;      // lambda-major, ell-minor
  std::vector<bool> invertible;              // per lambda: min_ell |S_ell| > threshold
  double min_abs_s(int lambda_index) const;
};

ScatteringProfile scattering_profile(const OpticalModel& model, double lambda_min,
                                     double lambda_max, int n_lambda, int ell_max,
                                     int threads = 0);

}  // namespace dscat
