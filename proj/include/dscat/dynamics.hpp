#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dscat/model.hpp"
#include "dscat/resolvent.hpp"

namespace dscat {

class BoxTooSmallError : public std::runtime_error {
 public:
  explicit BoxTooSmallError(double leakage);
  double leakage;
};

/// Semigroup trajectory of the Cayley (Crank-Nicolson) step
/// u <- (Id + i dt/2 H)^{-1}(Id - i dt/2 H) u, contractive for W >= 0.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> norms;          // ||u_t||, non-increasing
  double p_scatt_estimate = 0.0;      // median of ||u_t||^2 over the last 10% of steps
  double p_abs_estimate = 0.0;        // 1 - p_scatt_estimate, exactly
  double leakage = 0.0;               // max probability mass in the outer 5% band
  bool step_warning = false;          // dt ||H|| > 10 (accuracy, not stability)
  Eigen::VectorXcd final_state;
};

/// Fraction of the box counted as the boundary band for leakage monitoring.
inline constexpr double kLeakageBand = 0.05;

TrajectoryRecord propagate(const OpticalModel& model, int ell,
                           const Eigen::VectorXcd& u0, double t_final, double dt);

/// Normalized Gaussian bump exp(-(r-center)^2 / (2 width^2)) on the grid
/// (unit norm in the uniform-weight discrete L^2 product).
Eigen::VectorXcd gaussian_state(const RadialGrid& grid, double center, double width);

enum class StateClass { DecayingCandidate, ScatteringCandidate, Bound };

class ClassificationUndeterminedError : public std::runtime_error {
 public:
  ClassificationUndeterminedError();
};

struct StateClassification {
  double decay_rate_fit = 0.0;   // slope of log||u_t||
  double predicted_rate = 0.0;   // Im(lambda) of the eigenpair
  double fit_residual = 0.0;
  StateClass state_class = StateClass::Bound;
};

/// Propagates an eigenvector and compares the fitted norm decay with
/// e^{t Im(lambda)}.
StateClassification decay_check(const OpticalModel& model, int ell,
                                const EigenPair& pair, double t_final = 0.0,
                                double dt = 0.01);

/// Free-comparison probe for weak asymptotic completeness: propagates u0
/// under H on a doubling horizon schedule and maps back with the exact
/// inverse of the discrete free propagator; decreasing Cauchy increments
/// ||v_{2T} - v_T|| support the existence of the free asymptote.
struct WeakAcRecord {
  std::vector<double> horizons;      // T, 2T, 4T, ...
  std::vector<double> increments;    // ||v_{next} - v_prev}||
  std::vector<double> v_norms;
  double leakage = 0.0;
};

WeakAcRecord weak_ac_probe(const OpticalModel& model, int ell,
                           const Eigen::VectorXcd& u0, double t_initial,
                           double dt = 0.01, int doublings = 3);

/// Eigen-decomposition of the discrete free channel operator (cached per
/// grid/channel); shared immutable data for spectral free evolution.
struct FreeEigensystem {
  Eigen::MatrixXd q;        // orthonormal eigenvectors (columns)
  Eigen::VectorXd values;
};
const FreeEigensystem& free_eigensystem(const RadialGrid& grid, int ell);

}  // namespace dscat
