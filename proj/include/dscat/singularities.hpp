#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dscat/model.hpp"
#include "dscat/resolvent.hpp"

namespace dscat {

/// sigma_min of Id - iA_ell(lambda) per channel; positive iff lambda is a
/// regular spectral point on the grid.
struct RegularityMargin {
  double lambda = 0.0;
  std::vector<double> per_channel;  // index = ell
  double overall = 0.0;             // min over channels
  bool untrusted = false;           // any channel flagged by assemble_A
};

RegularityMargin regularity_margin(const OpticalModel& model, double lambda,
                                   int ell_max);

/// Smallest ell with ||A_ell|| < 1e-8 across the scanned interval, capped at 64.
int choose_ell_max(const OpticalModel& model, double lambda_min, double lambda_max);

struct DetectedSingularity {
  double lambda_star = 0.0;
  int ell = 0;
  double margin = 0.0;
  int order = 0;        // 0 when the order fit did not converge
  bool order_ok = false;
  bool trusted = false;
};

struct SingularityReport {
  double lambda_min = 0.0, lambda_max = 0.0;
  std::vector<double> lambdas;
  std::vector<RegularityMargin> margins;       // one per lambda
  double detection_threshold = 0.0;
  std::vector<DetectedSingularity> detected;
  bool any_untrusted_lambda() const;
};

struct ScanParams {
  int n_lambda = 200;
  int ell_max = -1;                 // < 0: choose_ell_max rule
  double rel_threshold = 1e-2;      // threshold = max(rel * median margin, floor)
  double threshold_floor = 1e-8;
  bool estimate_orders = true;
  bool check_refinement = true;     // h -> h/2 trust pass
  int threads = 0;
};

SingularityReport scan_singularities(const OpticalModel& model, double lambda_min,
                                     double lambda_max, const ScanParams& params = {});

/// Blow-up exponent of mu -> norm(mu) near lambda_star from a two-sided
/// log-log fit over |mu - lambda_star| in [1e-4, 1e-2]; shared by the order
/// estimator and its synthetic oracles.
struct OrderFit {
  double slope = 0.0;
  double residual = 0.0;  // rms of the log-log fit
  int nu = 0;             // round(-slope)
  bool ok = false;        // residual <= 0.1
};

template <typename F>
OrderFit fit_blowup_exponent(F&& norm_at, double lambda_star);

/// Order estimate for a detected singularity: fits log||B_ell(mu)|| against
/// log|mu - lambda_star| in the channel with the smallest margin at lambda_star.
OrderFit singularity_order(const OpticalModel& model, double lambda_star);

struct ConstructedSingularity {
  OpticalModel base;      // coupling 1, dissipative shape C0
  double g_star = 0.0;
  double lambda_star = 0.0;
  std::complex<double> mu_at_crossing;  // eigenvalue of iA(lambda_star), g = 1
  double margin_at_star = 0.0;
  OpticalModel tuned() const { return base.with_coupling(g_star); }
};

/// Tracks the eigenvalues of iA(lambda) (g = 1, s-wave) across the window,
/// locates a crossing Im mu = 0 with Re mu > 0 by bisection and returns the
/// coupling g* = Re(mu)^{-1/2} that places an eigenvalue of i g*^2 A at 1.
/// Empty result if no admissible crossing lies in the window.
std::optional<ConstructedSingularity> construct_singularity(
    const PotentialSpec& v, const PotentialSpec& c0_shape, double window_min,
    double window_max, const RadialGrid& grid);

struct GenericityEntry {
  double g = 0.0;
  double min_margin = 0.0;
  std::complex<double> mu;   // track of i g^2 A(lambda_star) nearest 1
  bool singular = false;
  double scaling_error = 0.0;    // |mu - g^2 mu_1| / |mu|
  double projection_angle = 0.0; // subspace angle between the g and g=1 eigenvectors
};

struct GenericitySweep {
  double lambda_star = 0.0;
  double g_star = 0.0;
  std::vector<GenericityEntry> entries;
};

GenericitySweep genericity_sweep(const ConstructedSingularity& cs,
                                 const std::vector<double>& g_values,
                                 double lambda_min, double lambda_max,
                                 const ScanParams& params = {});

/// Numerical form of the openness lemma: with m = min margin over the scan,
/// perturbations ||dC||_inf <= m / (4 ||G^V|| ||C||_inf + 1) keep the minimum
/// margin >= m / 2. G^V is the support-restricted R_V(lambda - i0).
struct OpennessCheck {
  double min_margin = 0.0;
  double g_v_norm = 0.0;
  double perturbation_bound = 0.0;
  int trials = 0;
  int held = 0;  // trials with min margin >= m/2
  bool all_held() const { return trials > 0 && held == trials; }
};

OpennessCheck openness_check(const OpticalModel& model, double lambda_min,
                             double lambda_max, int n_lambda, int ell_max,
                             int trials, unsigned long long seed);

enum class Verdict { CompleteOnJ, NotComplete, NotCertifiable };

struct CompletenessVerdict {
  Verdict verdict = Verdict::NotCertifiable;
  double lambda_min = 0.0, lambda_max = 0.0;
  std::vector<std::string> hypothesis_notes;
  std::vector<double> untrusted_lambdas;
  std::optional<DetectedSingularity> witness;
  SingularityReport scan;
};

/// Theorem-level verdict: asymptotic completeness on J iff the validated
/// model's scan detects no trusted singularity.
CompletenessVerdict asymptotic_completeness_verdict(const OpticalModel& model,
                                                    double lambda_min,
                                                    double lambda_max,
                                                    const ScanParams& params = {});

// ---------------------------------------------------------------------------

template <typename F>
OrderFit fit_blowup_exponent(F&& norm_at, double lambda_star) {
  // Two-sided log-spaced stencil, lambda_star itself excluded.
  static const double offsets[] = {1e-4, 3.162277660168379e-4, 1e-3,
                                   3.162277660168379e-3, 1e-2};
  std::vector<double> xs, ys;
  for (double d : offsets) {
    for (double sgn : {-1.0, 1.0}) {
      const double mu = lambda_star + sgn * d;
      xs.push_back(std::log(d));
      ys.push_back(std::log(norm_at(mu)));
    }
  }
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  OrderFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[i] - (intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.nu = static_cast<int>(std::lround(-fit.slope));
  if (fit.nu < 0) fit.nu = 0;
  fit.ok = fit.residual <= 0.1;
  return fit;
}

}  // namespace dscat
