#include "dscat/green.hpp"

#include <cmath>
#include <stdexcept>

#include "dscat/special.hpp"

namespace dscat {

std::complex<double> free_green_kernel(const Channel& ch, double r, double rp) {
  if (!(r > 0.0) || !(rp > 0.0))
    throw std::invalid_argument("free_green_kernel: radii must be > 0");
  const double lo = std::min(r, rp), hi = std::max(r, rp);
  const RiccatiTriple a = riccati(ch.ell, ch.k * lo);
  const RiccatiTriple b = riccati(ch.ell, ch.k * hi);
  return std::complex<double>(0.0, -1.0 / ch.k) * a.s * b.hm;
}

Eigen::MatrixXcd free_green_matrix(const RadialGrid& grid, const Channel& ch, int m) {
  if (m < 1 || m > grid.n)
    throw std::invalid_argument("free_green_matrix: block size out of range");
  Eigen::VectorXd s(m);
  Eigen::VectorXcd hm(m);
  for (int i = 0; i < m; ++i) {
    const RiccatiTriple t = riccati(ch.ell, ch.k * grid.node(i));
    s[i] = t.s;
    hm[i] = t.hm;
  }
  const std::complex<double> pref(0.0, -1.0 / ch.k);
  Eigen::MatrixXcd g(m, m);
  for (int p = 0; p < m; ++p) {
    const double swp = std::sqrt(grid.weight(p));
    for (int q = 0; q <= p; ++q) {
      const std::complex<double> val =
          pref * s[q] * hm[p] * (swp * std::sqrt(grid.weight(q)));
      g(p, q) = val;
      g(q, p) = val;
    }
  }
  return g;
}

Eigen::MatrixXd zero_energy_green_matrix(const RadialGrid& grid, int ell, int m) {
  if (m < 1 || m > grid.n)
    throw std::invalid_argument("zero_energy_green_matrix: block size out of range");
  // solutions r^{ell+1} (regular) and r^{-ell} (bounded); Wronskian 2 ell + 1
  Eigen::MatrixXd g(m, m);
  for (int p = 0; p < m; ++p) {
    const double rp = grid.node(p);
    const double swp = std::sqrt(grid.weight(p));
    for (int q = 0; q <= p; ++q) {
      const double rq = grid.node(q);  // rq <= rp
      const double kernel =
          std::pow(rq, ell + 1) * std::pow(rp, -ell) / (2.0 * ell + 1.0);
      const double val = kernel * swp * std::sqrt(grid.weight(q));
      g(p, q) = val;
      g(q, p) = val;
    }
  }
  return g;
}

}  // namespace dscat
