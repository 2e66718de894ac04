#include "dscat/resolvent.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "dscat/green.hpp"
#include "dscat/util.hpp"

namespace dscat {

SpectralSingularityError::SpectralSingularityError(double lambda_, double sigma_min_)
    : std::runtime_error("boundary value C R(lambda - i0) C* does not exist: "
                         "Id - iA numerically singular"),
      lambda(lambda_),
      sigma_min(sigma_min_) {}

SigmaExtremes sigma_extremes(const Eigen::MatrixXcd& m) {
  // Singular values via the Hermitian Gram matrix; resolves smin down to
  // about 1e-8 * smax, the scan floor.
  const Eigen::MatrixXcd gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  SigmaExtremes s;
  s.smin = std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
  s.smax = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  return s;
}

double block_norm(const WeightedResolvent& wr) {
  return sigma_extremes(wr.block()).smax;
}

WeightedResolvent assemble_A(const OpticalModel& model, const Channel& ch) {
  WeightedResolvent wr;
  wr.ell = ch.ell;
  wr.lambda = ch.lambda;
  wr.kind = ResolventKind::A_of_HV;
  const int n = model.grid().n;
  const int m = model.support_nodes();
  wr.block_size = m;
  wr.entries = Eigen::MatrixXcd::Zero(n, n);

  const Eigen::VectorXd gc = model.coupling() * model.c().head(m);
  if (gc.isZero(0.0) ) {
    wr.condition = 1.0;
    return wr;  // C = 0: A = 0
  }

  const Eigen::MatrixXcd g0 = free_green_matrix(model.grid(), ch, m);
  Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(m, m);
  if (!model.v_spec().is_zero()) {
    Eigen::MatrixXcd g0v = g0;
    for (int q = 0; q < m; ++q) g0v.col(q) *= model.v()[q];
    lhs += g0v;
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(lhs);
  wr.condition = 1.0 / std::max(lu.rcond(), 1e-300);
  wr.untrusted = wr.condition > kUntrustedCondition;
  const Eigen::MatrixXcd rv = lu.solve(g0);  // R_V block = (Id + G0 V)^{-1} G0

  wr.entries.topLeftCorner(m, m) =
      gc.asDiagonal() * rv * gc.asDiagonal();
  return wr;
}

WeightedResolvent assemble_B(const WeightedResolvent& a) {
  const int m = a.block_size;
  const Eigen::MatrixXcd ab = a.entries.topLeftCorner(m, m);
  const Eigen::MatrixXcd lhs =
      Eigen::MatrixXcd::Identity(m, m) - std::complex<double>(0, 1) * ab;
  const double smin = std::min(sigma_extremes(lhs).smin, 1.0);
  if (smin <= 1e-10) throw SpectralSingularityError(a.lambda, smin);

  WeightedResolvent wr;
  wr.ell = a.ell;
  wr.lambda = a.lambda;
  wr.kind = ResolventKind::B_of_H;
  wr.block_size = m;
  wr.untrusted = a.untrusted;
  wr.condition = a.condition;
  wr.entries = Eigen::MatrixXcd::Zero(a.entries.rows(), a.entries.cols());
  wr.entries.topLeftCorner(m, m) = lhs.partialPivLu().solve(ab);
  return wr;
}

WeightedResolvent assemble_B(const OpticalModel& model, const Channel& ch) {
  return assemble_B(assemble_A(model, ch));
}

Eigen::MatrixXcd full_resolvent_block(const OpticalModel& model, const Channel& ch) {
  const int m = model.support_nodes();
  const Eigen::MatrixXcd g0 = free_green_matrix(model.grid(), ch, m);
  if (model.v_spec().is_zero()) return g0;
  Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(m, m);
  Eigen::MatrixXcd g0v = g0;
  for (int q = 0; q < m; ++q) g0v.col(q) *= model.v()[q];
  lhs += g0v;
  return lhs.partialPivLu().solve(g0);
}

Eigen::MatrixXcd channel_hamiltonian(const OpticalModel& model, int ell) {
  const RadialGrid& g = model.grid();
  const int n = g.n;
  const double inv_h2 = 1.0 / (g.h * g.h);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  const double g2 = model.coupling() * model.coupling();
  for (int i = 0; i < n; ++i) {
    const double r = g.node(i);
    h(i, i) = std::complex<double>(
        2.0 * inv_h2 + ell * (ell + 1.0) / (r * r) + model.v()[i],
        -g2 * model.w()[i]);
    if (i + 1 < n) {
      h(i, i + 1) = -inv_h2;
      h(i + 1, i) = -inv_h2;
    }
  }
  return h;
}

namespace {

// Sturm-sequence eigenvalue count for a symmetric tridiagonal matrix:
// number of eigenvalues strictly below x.
int sturm_count(const Eigen::VectorXd& diag, double off, double x) {
  const int n = static_cast<int>(diag.size());
  int count = 0;
  double q = diag[0] - x;
  if (q < 0) ++count;
  const double off2 = off * off;
  for (int i = 1; i < n; ++i) {
    const double denom = (q == 0.0) ? 1e-300 : q;
    q = diag[i] - x - off2 / denom;
    if (q < 0) ++count;
  }
  return count;
}

// Inverse iteration on the tridiagonal channel Hamiltonian.
EigenPair refine_pair(const Eigen::VectorXcd& lower, const Eigen::VectorXcd& diag,
                      const Eigen::VectorXcd& upper, std::complex<double> z0,
                      const Eigen::VectorXcd* start) {
  const int n = static_cast<int>(diag.size());
  Eigen::VectorXcd u = start ? *start : Eigen::VectorXcd::Ones(n);
  u.normalize();
  std::complex<double> z = z0;
  double residual = 1e300;
  for (int it = 0; it < 25; ++it) {
    Eigen::VectorXcd shifted = diag;
    shifted.array() -= z;
    TridiagLU lu(lower, shifted, upper);
    if (lu.singular()) break;
    Eigen::VectorXcd next = lu.solve(u);
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    u = next / norm;
    const Eigen::VectorXcd hu = tridiag_apply(lower, diag, upper, u);
    const std::complex<double> rayleigh = u.dot(hu);  // u^* H u, u normalized
    residual = (hu - rayleigh * u).norm();
    z = rayleigh;
    if (residual <= 1e-12) break;
  }
  return EigenPair{z, u, residual};
}

}  // namespace

SpectrumReport discrete_spectrum(const OpticalModel& model, int ell,
                                 const ComplexRegion& region) {
  if (region.im_max > 1e-8)
    throw std::invalid_argument(
        "discrete_spectrum: region must lie in the closed lower half-plane");
  SpectrumReport rep;
  rep.ell = ell;

  const RadialGrid& g = model.grid();
  const int n = g.n;
  const double inv_h2 = 1.0 / (g.h * g.h);
  const double g2 = model.coupling() * model.coupling();

  Eigen::VectorXd re_diag(n);
  Eigen::VectorXd im_diag(n);
  for (int i = 0; i < n; ++i) {
    const double r = g.node(i);
    re_diag[i] = 2.0 * inv_h2 + ell * (ell + 1.0) / (r * r) + model.v()[i];
    im_diag[i] = -g2 * model.w()[i];
  }
  const Eigen::VectorXcd lower = Eigen::VectorXcd::Constant(n - 1, -inv_h2);
  const Eigen::VectorXcd diag =
      re_diag.cast<std::complex<double>>() +
      std::complex<double>(0, 1) * im_diag.cast<std::complex<double>>();

  std::vector<std::complex<double>> candidates;
  const bool dissipation_free = im_diag.isZero(0.0);
  if (dissipation_free) {
    // Symmetric tridiagonal: locate the eigenvalues in [re_min, re_max] by
    // Sturm bisection.
    const double bound = re_diag.cwiseAbs().maxCoeff() + 2.0 * inv_h2;
    const double lo = std::max(region.re_min, -bound);
    const double hi = std::min(region.re_max, bound);
    if (lo < hi) {
      const int below_lo = sturm_count(re_diag, -inv_h2, lo);
      const int below_hi = sturm_count(re_diag, -inv_h2, hi);
      for (int idx = below_lo; idx < below_hi; ++idx) {
        double a = lo, b = hi;
        for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
          const double mid = 0.5 * (a + b);
          if (sturm_count(re_diag, -inv_h2, mid) > idx)
            b = mid;
          else
            a = mid;
        }
        candidates.emplace_back(0.5 * (a + b), 0.0);
      }
    }
  } else {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      h(i, i) = diag[i];
      if (i + 1 < n) {
        h(i, i + 1) = -inv_h2;
        h(i + 1, i) = -inv_h2;
      }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
    for (int i = 0; i < n; ++i) {
      const std::complex<double> z = es.eigenvalues()[i];
      if (z.real() >= region.re_min && z.real() <= region.re_max &&
          z.imag() >= region.im_min && z.imag() <= region.im_max)
        candidates.push_back(z);
    }
  }

  for (const auto& z0 : candidates) {
    EigenPair pair = refine_pair(lower, diag, lower, z0, nullptr);
    // keep only pairs that refined into the region at working accuracy
    if (pair.residual <= 1e-8 && pair.z.real() >= region.re_min - 1e-8 &&
        pair.z.real() <= region.re_max + 1e-8 &&
        pair.z.imag() >= region.im_min - 1e-8 &&
        pair.z.imag() <= region.im_max + 1e-8)
      rep.pairs.push_back(std::move(pair));
  }
  std::sort(rep.pairs.begin(), rep.pairs.end(),
            [](const EigenPair& a, const EigenPair& b) {
              return a.z.real() != b.z.real() ? a.z.real() < b.z.real()
                                              : a.z.imag() < b.z.imag();
            });
  return rep;
}

}  // namespace dscat
