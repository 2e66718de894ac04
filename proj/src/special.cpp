#include "dscat/special.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dscat/model.hpp"

namespace dscat {

namespace {

// Starting index for Miller's downward recurrence: far enough above both
// the order and the turning point that the minimal solution dominates.
int miller_start(int ell, double x) {
  const int from_x = static_cast<int>(std::ceil(x + 14.0 * std::cbrt(x + 1.0)));
  return std::max(ell + 24, from_x + 8);
}

}  // namespace

BesselPair spherical_bessel(int ell, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("spherical_bessel: x must be > 0");
  if (ell < 0 || ell > kMaxEll)
    throw std::invalid_argument("spherical_bessel: ell out of supported range [0,64]");

  const double sx = std::sin(x), cx = std::cos(x);
  const double j0 = sx / x;
  const double j1 = sx / (x * x) - cx / x;

  // Upward recurrence for y (the growing, stable direction).
  std::vector<double> y(static_cast<size_t>(ell) + 2);
  y[0] = -cx / x;
  y[1] = -cx / (x * x) - sx / x;
  for (int l = 1; l <= ell; ++l) y[l + 1] = (2.0 * l + 1.0) / x * y[l] - y[l - 1];

  // Downward (Miller) recurrence for j, normalized against closed-form j0 or
  // j1, whichever is farther from a zero.
  const int m0 = miller_start(ell, x);
  std::vector<double> jt(static_cast<size_t>(m0) + 2);
  jt[m0 + 1] = 0.0;
  jt[m0] = 1e-30;
  for (int m = m0; m >= 1; --m) {
    jt[m - 1] = (2.0 * m + 1.0) / x * jt[m] - jt[m + 1];
    if (std::fabs(jt[m - 1]) > 1e250) {
      for (int k = m - 1; k <= m0 + 1; ++k) jt[k] *= 1e-250;
    }
  }
  const double scale = (std::fabs(j0) >= std::fabs(j1)) ? j0 / jt[0] : j1 / jt[1];

  BesselPair out;
  out.ell = ell;
  out.x = x;
  out.j = (ell == 0) ? j0 : jt[ell] * scale;
  out.y = y[ell];
  if (ell == 0) {
    out.jp = -j1;
    out.yp = -y[1];
  } else {
    out.jp = jt[ell - 1] * scale - (ell + 1.0) / x * out.j;
    out.yp = y[ell - 1] - (ell + 1.0) / x * out.y;
  }
  return out;
}

RiccatiTriple riccati(int ell, double x) {
  const BesselPair b = spherical_bessel(ell, x);
  RiccatiTriple t;
  t.s = x * b.j;
  t.sp = b.j + x * b.jp;
  const std::complex<double> i(0.0, 1.0);
  t.hm = x * (b.j - i * b.y);
  t.hmp = (b.j - i * b.y) + x * (b.jp - i * b.yp);
  t.hp = x * (b.j + i * b.y);
  t.hpp = (b.j + i * b.y) + x * (b.jp + i * b.yp);
  return t;
}

}  // namespace dscat
