#include "dscat/scattering.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "dscat/green.hpp"
#include "dscat/special.hpp"
#include "dscat/util.hpp"

namespace dscat {

MatchingDegenerateError::MatchingDegenerateError(double lambda_)
    : std::runtime_error("scattering match degenerate: incoming amplitude vanished "
                         "(refine the integration step)"),
      lambda(lambda_) {}

namespace {

using Complex = std::complex<double>;

struct RadialOde {
  const OpticalModel* model;
  int ell;
  double lambda;
  // active smooth segment; potentials are probed strictly inside it so the
  // RK4 stages at a cut never sample the wrong side of a jump
  double seg_lo = 0.0, seg_hi = 0.0;

  Complex u(double r) const {
    const double rc = std::clamp(r, seg_lo, seg_hi);
    const double g2 = model->coupling() * model->coupling();
    return Complex(model->v_spec()(rc), -g2 * model->w_spec()(rc));
  }
  // phi'' = q(r) phi
  Complex q(double r) const {
    return ell * (ell + 1.0) / (r * r) + u(r) - lambda;
  }
};

struct State {
  Complex phi, dphi;
};

State rk4_step(const RadialOde& ode, double r, double hs, const State& y) {
  auto f = [&](double rr, const State& s) {
    return State{s.dphi, ode.q(rr) * s.phi};
  };
  const State k1 = f(r, y);
  const State k2 = f(r + 0.5 * hs, {y.phi + 0.5 * hs * k1.phi, y.dphi + 0.5 * hs * k1.dphi});
  const State k3 = f(r + 0.5 * hs, {y.phi + 0.5 * hs * k2.phi, y.dphi + 0.5 * hs * k2.dphi});
  const State k4 = f(r + hs, {y.phi + hs * k3.phi, y.dphi + hs * k3.dphi});
  return {y.phi + hs / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
          y.dphi + hs / 6.0 * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi)};
}

}  // namespace

std::complex<double> scattering_coefficient(const OpticalModel& model,
                                            const Channel& ch, double step) {
  if (model.v_spec().is_zero() && model.w_spec().is_zero()) return 1.0;

  const double r_match = model.support_radius();
  double r0 = model.grid().h;
  if (r0 >= r_match) r0 = 0.5 * r_match;
  if (step <= 0.0) step = 0.5 * model.grid().h;

  RadialOde ode{&model, ch.ell, ch.lambda};

  // Split at potential breakpoints so every RK4 segment sees a smooth
  // right-hand side.
  std::vector<double> cuts{r0, r_match};
  for (double b : model.v_spec().breakpoints())
    if (b > r0 && b < r_match) cuts.push_back(b);
  for (double b : model.w_spec().breakpoints())
    if (b > r0 && b < r_match) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-13; }),
             cuts.end());

  // Regular solution: phi ~ r^{ell+1} (1 + (U - lambda) r^2 / (4 ell + 6)) near 0.
  ode.seg_lo = cuts[0];
  ode.seg_hi = cuts[1];
  const Complex corr = (ode.u(r0) - ch.lambda) / (4.0 * ch.ell + 6.0);
  State y;
  y.phi = std::pow(r0, ch.ell + 1) * (1.0 + corr * r0 * r0);
  y.dphi = (ch.ell + 1.0) * std::pow(r0, ch.ell) +
           (ch.ell + 3.0) * corr * std::pow(r0, ch.ell + 2);

  for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double a = cuts[seg], b = cuts[seg + 1];
    const int n_steps = std::max(1, static_cast<int>(std::lround((b - a) / step)));
    const double hs = (b - a) / n_steps;
    const double inset = 1e-9 * (b - a);
    ode.seg_lo = a + inset;
    ode.seg_hi = b - inset;
    double r = a;
    for (int i = 0; i < n_steps; ++i) {
      y = rk4_step(ode, r, hs, y);
      r = a + (i + 1) * hs;
      const double mag = std::abs(y.phi) + std::abs(y.dphi);
      if (mag > 1e200) {
        y.phi /= mag;
        y.dphi /= mag;
      }
    }
  }

  // Match phi = alpha h^- + beta h^+ at r_match; Wronskian W[h^-, h^+] = 2ik.
  const RiccatiTriple t = riccati(ch.ell, ch.k * r_match);
  const Complex two_ik(0.0, 2.0 * ch.k);
  const Complex alpha = (y.phi * ch.k * t.hpp - y.dphi * t.hp) / two_ik;
  const Complex beta = (y.phi * ch.k * t.hmp - y.dphi * t.hm) / (-two_ik);
  const double scale = std::abs(y.phi) + std::abs(y.dphi) / ch.k;
  if (std::abs(alpha) <= 1e-14 * scale) throw MatchingDegenerateError(ch.lambda);
  return beta / alpha;
}

std::complex<double> scattering_coefficient_integral(const OpticalModel& model,
                                                     const Channel& ch) {
  if (model.v_spec().is_zero() && model.w_spec().is_zero()) return 1.0;
  const int m = model.support_nodes();
  const RadialGrid& grid = model.grid();
  const double g2 = model.coupling() * model.coupling();

  Eigen::VectorXcd u_diag(m);
  Eigen::VectorXcd s_w(m);  // sqrt(w_p) * s_ell(k r_p)
  for (int i = 0; i < m; ++i) {
    u_diag[i] = Complex(model.v()[i], -g2 * model.w()[i]);
    s_w[i] = std::sqrt(grid.weight(i)) * riccati(ch.ell, ch.k * grid.node(i)).s;
  }
  const Eigen::MatrixXcd g0 = free_green_matrix(grid, ch, m);
  Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(m, m);
  lhs += g0 * u_diag.asDiagonal();
  const Eigen::VectorXcd psi = lhs.partialPivLu().solve(s_w);
  const Complex integral = (s_w.array() * u_diag.array() * psi.array()).sum();
  return 1.0 / (1.0 + Complex(0.0, 2.0 / ch.k) * integral);
}

double ScatteringProfile::min_abs_s(int lambda_index) const {
  double m = 1e300;
  for (int l = 0; l <= ell_max; ++l)
    m = std::min(m, entries[static_cast<size_t>(lambda_index) * (ell_max + 1) + l].abs_s);
  return m;
}

ScatteringProfile scattering_profile(const OpticalModel& model, double lambda_min,
                                     double lambda_max, int n_lambda, int ell_max,
                                     int threads) {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min) || !std::isfinite(lambda_max))
    throw std::invalid_argument("scattering_profile: need compact J in (0, inf)");
  if (n_lambda < 2) throw std::invalid_argument("scattering_profile: n_lambda too small");

  ScatteringProfile prof;
  prof.ell_max = ell_max;
  prof.lambdas.resize(n_lambda);
  for (int i = 0; i < n_lambda; ++i)
    prof.lambdas[i] = lambda_min + (lambda_max - lambda_min) * i / (n_lambda - 1.0);
  prof.entries.resize(static_cast<size_t>(n_lambda) * (ell_max + 1));
  prof.invertible.assign(n_lambda, false);

  parallel_for(n_lambda, threads, [&](int i) {
    const double lambda = prof.lambdas[i];
    for (int l = 0; l <= ell_max; ++l) {
      const Complex s = scattering_coefficient(model, Channel(l, lambda));
      prof.entries[static_cast<size_t>(i) * (ell_max + 1) + l] =
          ScatteringEntry{lambda, l, s, std::abs(s)};
    }
  });
  for (int i = 0; i < n_lambda; ++i)
    prof.invertible[i] = prof.min_abs_s(i) > kInvertibilityThreshold;
  return prof;
}

}  // namespace dscat
