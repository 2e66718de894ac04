#pragma once

#include <complex>

namespace dscat {

/// Spherical Bessel values j_ell(x), y_ell(x) and derivatives at x > 0.
/// Wronskian j*y' - j'*y = 1/x^2 holds to 1e-10 relative per evaluation.
struct BesselPair {
  int ell;
  double x;
  double j, y;
  double jp, yp;
};

/// j by downward (Miller) recurrence, y by upward recurrence.
/// Requires x > 0 and 0 <= ell <= 64.
BesselPair spherical_bessel(int ell, double x);

/// Riccati-Bessel regular solution s_ell(x) = x j_ell(x) and the
/// incoming/outgoing Riccati-Hankel solutions h^∓_ell(x) = x (j ∓ i y),
/// with derivatives. For ell = 0: s = sin x, h^- = i e^{-ix}, h^+ = -i e^{ix}.
struct RiccatiTriple {
  double s, sp;                   // regular and derivative
  std::complex<double> hm, hmp;   // incoming e^{-ix} type
  std::complex<double> hp, hpp;   // outgoing e^{+ix} type
};

RiccatiTriple riccati(int ell, double x);

}  // namespace dscat
