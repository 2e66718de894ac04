#pragma once

#include <Eigen/Core>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dscat/model.hpp"

namespace dscat {

enum class ResolventKind { A_of_HV, B_of_H };

/// Quadrature-weighted boundary value on the grid:
///   A_ell(lambda) = C R_V(lambda - i0) C    (kind A_of_HV)
///   B_ell(lambda) = C R(lambda - i0) C      (kind B_of_H, from B = (Id - iA)^{-1} A)
/// Entries outside the potential/weight support are zero; all nonzero
/// structure lives in the leading support-block of size block_size.
struct WeightedResolvent {
  int ell = 0;
  double lambda = 0.0;
  ResolventKind kind = ResolventKind::A_of_HV;
  Eigen::MatrixXcd entries;  // n x n, complex symmetric
  int block_size = 0;        // leading nodes covering supp V and supp C
  bool untrusted = false;    // Lippmann-Schwinger solve ill-conditioned at this lambda
  double condition = 0.0;    // condition estimate of Id + G0 V

  Eigen::MatrixXcd block() const { return entries.topLeftCorner(block_size, block_size); }
};

/// Thrown by assemble_B when Id - iA is numerically singular, i.e. the
/// boundary value C R(lambda - i0) C* does not exist (spectral singularity).
class SpectralSingularityError : public std::runtime_error {
 public:
  SpectralSingularityError(double lambda, double sigma_min);
  double lambda;
  double sigma_min;
};

/// Condition-number threshold past which a lambda is flagged untrusted
/// (grid artifact suspect; caller refines).
inline constexpr double kUntrustedCondition = 1e12;

WeightedResolvent assemble_A(const OpticalModel& model, const Channel& ch);
WeightedResolvent assemble_B(const OpticalModel& model, const Channel& ch);
WeightedResolvent assemble_B(const WeightedResolvent& a);

/// Smallest/largest singular value of the support block of Id - iA, clamped
/// by the identity tail: sigma_min of the full operator is min(block, 1).
struct SigmaExtremes {
  double smin = 0.0;
  double smax = 0.0;
};
SigmaExtremes sigma_extremes(const Eigen::MatrixXcd& m);

/// Spectral norm of the support block.
double block_norm(const WeightedResolvent& wr);

/// Support block of R_V(lambda - i0) = (Id + G0 V)^{-1} G0 without the C
/// sandwich (the G^V of the openness bound).
Eigen::MatrixXcd full_resolvent_block(const OpticalModel& model, const Channel& ch);

struct ComplexRegion {
  double re_min, re_max;
  double im_min, im_max;
};

struct EigenPair {
  std::complex<double> z;
  Eigen::VectorXcd u;   // normalized
  double residual;      // ||(H - z) u||
};

struct SpectrumReport {
  int ell = 0;
  std::vector<EigenPair> pairs;
};

/// Eigenvalues of the discretized h_ell = -d^2/dr^2 + ell(ell+1)/r^2 + V - i g^2 W
/// (centered differences, Dirichlet ends) inside the region, refined by
/// inverse iteration. W == 0 takes a symmetric-tridiagonal bisection path.
SpectrumReport discrete_spectrum(const OpticalModel& model, int ell,
                                 const ComplexRegion& region);

/// Dense matrix of the channel Hamiltonian (exposed for tests and dynamics).
Eigen::MatrixXcd channel_hamiltonian(const OpticalModel& model, int ell);

}  // namespace dscat
