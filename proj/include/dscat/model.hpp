#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace dscat {

/// Uniform radial mesh r_i = i*h, i = 1..n. The origin is excluded; every
/// operator assembled on the mesh treats phi(0) = 0 (Dirichlet).
struct RadialGrid {
  double r_max = 0.0;
  int n = 0;
  double h = 0.0;

  double node(int i) const { return (i + 1) * h; }  // i is 0-based storage index
  std::vector<double> nodes() const;

  /// Trapezoid weight for integrals over [0, r_max]; the r = 0 endpoint
  /// carries no node (integrands vanish there).
  double weight(int i) const { return i + 1 == n ? 0.5 * h : h; }

  /// Same box, half the spacing.
  RadialGrid refined() const;

  /// Number of leading nodes with r_i <= radius.
  int nodes_within(double radius) const;
};

RadialGrid build_radial_grid(double r_max, int n);

/// Compactly supported radial potential, either piecewise constant on
/// nested shells or tabulated with linear interpolation. Values are zero
/// beyond the support radius.
class PotentialSpec {
 public:
  PotentialSpec() = default;  // identically zero

  /// steps = {(outer_radius_j, value_j)}: value_j on (radius_{j-1}, radius_j].
  static PotentialSpec piecewise(std::vector<std::pair<double, double>> steps);

  /// points = {(r_j, value_j)}, r_j increasing: linear interpolation between
  /// samples, constant to the left of the first, zero beyond the last.
  static PotentialSpec tabulated(std::vector<std::pair<double, double>> points);

  double operator()(double r) const;
  double support_radius() const { return support_radius_; }
  bool is_zero() const;

  /// Pointwise square (piecewise values squared; tabulated samples squared).
  PotentialSpec squared() const;

  /// Radii where the potential (or its derivative) may jump; ODE integrators
  /// split at these.
  std::vector<double> breakpoints() const;

 private:
  enum class Kind { Zero, Piecewise, Tabulated };
  Kind kind_ = Kind::Zero;
  std::vector<std::pair<double, double>> data_;
  double support_radius_ = 0.0;
};

Eigen::VectorXd sample_potential(const PotentialSpec& spec, const RadialGrid& grid);

/// Partial-wave sector: angular momentum ell and energy lambda > 0 on the
/// essential spectrum, with momentum k = +sqrt(lambda).
struct Channel {
  int ell;
  double lambda;
  double k;

  Channel(int ell_, double lambda_);
};

inline constexpr int kMaxEll = 64;

/// The optical-model triple (V, W, grid) with C = sqrt(W) and a dimensionless
/// coupling g multiplying C (effective dissipation g^2 W). All data is
/// sampled on construction and immutable afterwards.
class OpticalModel {
 public:
  OpticalModel() = default;  // empty; fill via make/from_c_samples

  static OpticalModel make(PotentialSpec v, PotentialSpec w, double coupling,
                           RadialGrid grid);

  /// Model whose dissipative factor is a raw (possibly signed) sample array;
  /// used by coupling-space perturbations. W samples become c^2 and the
  /// W spec is the tabulated interpolant of them (for off-grid evaluation).
  static OpticalModel from_c_samples(PotentialSpec v, Eigen::VectorXd c,
                                     double coupling, RadialGrid grid);

  const RadialGrid& grid() const { return grid_; }
  const PotentialSpec& v_spec() const { return v_spec_; }
  const PotentialSpec& w_spec() const { return w_spec_; }
  double coupling() const { return coupling_; }

  const Eigen::VectorXd& v() const { return v_; }
  const Eigen::VectorXd& w() const { return w_; }
  /// C(r_i) = sqrt(W(r_i)); empty invariant when W has negative samples.
  const Eigen::VectorXd& c() const { return c_; }
  bool w_has_negative() const { return w_has_negative_; }

  /// Count of leading nodes covering supp V and supp C.
  int support_nodes() const { return support_nodes_; }
  double support_radius() const { return support_radius_; }

  OpticalModel with_coupling(double coupling) const;
  OpticalModel refined() const;

 private:
  void finalize();

  PotentialSpec v_spec_, w_spec_;
  double coupling_ = 1.0;
  RadialGrid grid_;
  Eigen::VectorXd v_, w_, c_;
  bool w_has_negative_ = false;
  bool detached_c_ = false;  // c_ came from raw samples, not w_spec_
  int support_nodes_ = 0;
  double support_radius_ = 0.0;
};

struct ValidationReport {
  bool w_nonnegative = false;
  bool compact_support = false;
  bool zero_energy_regular = false;
  /// Distance of 1 from spec(-G0(0)V) on the grid (Birman-Schwinger proxy
  /// for "0 is neither an eigenvalue nor a resonance of H_V").
  double zero_energy_margin = 0.0;
  std::vector<std::string> messages;

  bool all_pass() const {
    return w_nonnegative && compact_support && zero_energy_regular;
  }
};

/// Margin below which the zero-energy condition is treated as failed and
/// completeness verdicts refuse to certify.
inline constexpr double kZeroEnergyMarginFloor = 1e-6;

ValidationReport validate_hypotheses(const OpticalModel& model);

}  // namespace dscat
