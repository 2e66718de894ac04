#pragma once

#include <Eigen/Core>
#include <complex>

#include "dscat/model.hpp"

namespace dscat {

/// Kernel of (h_ell^0 - lambda + i0)^{-1}, h_ell^0 = -d^2/dr^2 + ell(ell+1)/r^2,
/// i.e. the boundary value R_0(lambda - i0) = lim_{eps->0} (h^0 - lambda + i eps)^{-1}:
/// g_ell(r, r') = (-i/k) s_ell(k r_<) hminus_ell(k r_>).
/// For ell = 0 this is sin(k r_<) e^{-i k r_>} / k. The quadratic form has
/// non-positive imaginary part, matching the dissipative side of the axis.
std::complex<double> free_green_kernel(const Channel& ch, double r, double rp);

/// Leading m x m block of the quadrature-weighted free kernel matrix,
/// (G0)_pq = sqrt(w_p w_q) g_ell(r_p, r_q); matrix products then represent
/// operator composition. Complex symmetric by construction.
Eigen::MatrixXcd free_green_matrix(const RadialGrid& grid, const Channel& ch, int m);

/// Zero-energy kernel of (h_ell^0)^{-1}: r_<^{ell+1} r_>^{-ell} / (2 ell + 1);
/// min(r, r') for the s-wave. Weighted like free_green_matrix.
Eigen::MatrixXd zero_energy_green_matrix(const RadialGrid& grid, int ell, int m);

}  // namespace dscat
