#include "dscat/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "dscat/util.hpp"

namespace dscat {

namespace {

using Complex = std::complex<double>;

struct ChannelBands {
  Eigen::VectorXcd lower;  // constant -1/h^2
  Eigen::VectorXcd diag;
  double norm_estimate;
};

ChannelBands channel_bands(const OpticalModel& model, int ell) {
  const RadialGrid& g = model.grid();
  const int n = g.n;
  const double inv_h2 = 1.0 / (g.h * g.h);
  const double g2 = model.coupling() * model.coupling();
  ChannelBands b;
  b.lower = Eigen::VectorXcd::Constant(n - 1, -inv_h2);
  b.diag.resize(n);
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = g.node(i);
    b.diag[i] = Complex(2.0 * inv_h2 + ell * (ell + 1.0) / (r * r) + model.v()[i],
                        -g2 * model.w()[i]);
    dmax = std::max(dmax, std::abs(b.diag[i]));
  }
  b.norm_estimate = dmax + 2.0 * inv_h2;
  return b;
}

double grid_norm(const RadialGrid& g, const Eigen::VectorXcd& u) {
  return std::sqrt(g.h) * u.norm();
}

double tail_mass(const RadialGrid& g, const Eigen::VectorXcd& u) {
  const int band = std::max(1, static_cast<int>(std::lround(kLeakageBand * g.n)));
  return g.h * u.tail(band).squaredNorm();
}

// One Cayley semigroup driver shared by propagate / decay / weak-AC.
struct CayleyStepper {
  CayleyStepper(const OpticalModel& model, int ell, double dt)
      : bands(channel_bands(model, ell)), theta(0.5 * dt) {
    const int n = static_cast<int>(bands.diag.size());
    const Complex itheta(0.0, theta);
    Eigen::VectorXcd mdiag = Eigen::VectorXcd::Ones(n) + itheta * bands.diag;
    Eigen::VectorXcd moff = itheta * bands.lower;
    ndiag = Eigen::VectorXcd::Ones(n) - itheta * bands.diag;
    noff = (-itheta) * bands.lower;
    lu = TridiagLU(moff, mdiag, moff);
  }
  void step(Eigen::VectorXcd& u) const {
    u = lu.solve(tridiag_apply(noff, ndiag, noff, u));
  }
  ChannelBands bands;
  double theta;
  Eigen::VectorXcd ndiag, noff;
  TridiagLU lu;
};

}  // namespace

BoxTooSmallError::BoxTooSmallError(double leakage_)
    : std::runtime_error("boundary leakage exceeds 1e-3: enlarge r_max"),
      leakage(leakage_) {}

ClassificationUndeterminedError::ClassificationUndeterminedError()
    : std::runtime_error("decay-rate fit did not converge") {}

Eigen::VectorXcd gaussian_state(const RadialGrid& grid, double center, double width) {
  Eigen::VectorXcd u(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double r = grid.node(i);
    u[i] = std::exp(-(r - center) * (r - center) / (2.0 * width * width));
  }
  u /= grid_norm(grid, u);
  return u;
}

TrajectoryRecord propagate(const OpticalModel& model, int ell,
                           const Eigen::VectorXcd& u0, double t_final, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be > 0");
  if (!(t_final >= dt)) throw std::invalid_argument("propagate: need T >= dt");
  if (u0.size() != model.grid().n)
    throw std::invalid_argument("propagate: state size does not match the grid");
  const double norm0 = grid_norm(model.grid(), u0);
  if (std::abs(norm0 - 1.0) > 1e-8)
    throw std::invalid_argument("propagate: u0 must be normalized");

  const CayleyStepper stepper(model, ell, dt);
  const int steps = std::max(1, static_cast<int>(std::llround(t_final / dt)));

  TrajectoryRecord rec;
  rec.step_warning = dt * stepper.bands.norm_estimate > 10.0;
  rec.times.reserve(steps + 1);
  rec.norms.reserve(steps + 1);

  Eigen::VectorXcd u = u0;
  rec.times.push_back(0.0);
  rec.norms.push_back(norm0);
  rec.leakage = tail_mass(model.grid(), u);
  for (int s = 1; s <= steps; ++s) {
    stepper.step(u);
    rec.times.push_back(s * dt);
    rec.norms.push_back(grid_norm(model.grid(), u));
    rec.leakage = std::max(rec.leakage, tail_mass(model.grid(), u));
  }

  // p_scatt: median of ||u||^2 over the last 10% of steps.
  const int tail = std::max(1, static_cast<int>(rec.norms.size() / 10));
  std::vector<double> tail_sq(rec.norms.end() - tail, rec.norms.end());
  for (double& v : tail_sq) v *= v;
  rec.p_scatt_estimate = median(std::move(tail_sq));
  rec.p_abs_estimate = 1.0 - rec.p_scatt_estimate;
  rec.final_state = std::move(u);
  return rec;
}

StateClassification decay_check(const OpticalModel& model, int ell,
                                const EigenPair& pair, double t_final, double dt) {
  if (pair.residual > 1e-8)
    throw std::invalid_argument("decay_check: eigenpair residual above 1e-8");
  const double rate_guess = std::abs(pair.z.imag());
  if (t_final <= 0.0)
    t_final = std::clamp(rate_guess > 1e-12 ? 3.0 / rate_guess : 50.0, 20.0 * dt, 400.0);

  Eigen::VectorXcd u0 = pair.u / grid_norm(model.grid(), pair.u);
  const TrajectoryRecord rec = propagate(model, ell, u0, t_final, dt);

  std::vector<double> log_norms(rec.norms.size());
  for (size_t i = 0; i < rec.norms.size(); ++i) log_norms[i] = std::log(rec.norms[i]);
  const LineFit fit = fit_line(rec.times, log_norms);

  StateClassification cls;
  cls.decay_rate_fit = fit.slope;
  cls.predicted_rate = pair.z.imag();
  cls.fit_residual = fit.rms_residual;
  if (fit.rms_residual > 1e-2) throw ClassificationUndeterminedError();
  if (fit.slope < -1e-6)
    cls.state_class = StateClass::DecayingCandidate;
  else
    cls.state_class = StateClass::Bound;
  return cls;
}

const FreeEigensystem& free_eigensystem(const RadialGrid& grid, int ell) {
  struct Key {
    int n;
    int ell;
    long long hbits;
    bool operator<(const Key& o) const {
      return std::tie(n, ell, hbits) < std::tie(o.n, o.ell, o.hbits);
    }
  };
  static std::map<Key, std::unique_ptr<FreeEigensystem>> cache;
  static std::mutex mutex;

  long long hbits;
  static_assert(sizeof(hbits) == sizeof(grid.h));
  std::memcpy(&hbits, &grid.h, sizeof(hbits));
  const Key key{grid.n, ell, hbits};

  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const int n = grid.n;
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const double r = grid.node(i);
      h0(i, i) = 2.0 * inv_h2 + ell * (ell + 1.0) / (r * r);
      if (i + 1 < n) {
        h0(i, i + 1) = -inv_h2;
        h0(i + 1, i) = -inv_h2;
      }
    }
    auto sys = std::make_unique<FreeEigensystem>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h0);
    sys->q = es.eigenvectors();
    sys->values = es.eigenvalues();
    it = cache.emplace(key, std::move(sys)).first;
  }
  return *it->second;
}

WeakAcRecord weak_ac_probe(const OpticalModel& model, int ell,
                           const Eigen::VectorXcd& u0, double t_initial,
                           double dt, int doublings) {
  if (!(t_initial > 0.0) || !(dt > 0.0) || doublings < 1)
    throw std::invalid_argument("weak_ac_probe: bad schedule");
  const double norm0 = grid_norm(model.grid(), u0);
  if (std::abs(norm0 - 1.0) > 1e-8)
    throw std::invalid_argument("weak_ac_probe: u0 must be normalized");

  const CayleyStepper stepper(model, ell, dt);
  const FreeEigensystem& free = free_eigensystem(model.grid(), ell);

  // Backward free map after N Cayley steps: exact inverse of the discrete
  // free propagator, phase e^{+2 i N atan(theta * eps_m)} per free mode.
  auto back_map = [&](const Eigen::VectorXcd& u, long long n_steps) {
    Eigen::VectorXcd coeff = free.q.transpose() * u;
    for (int m = 0; m < coeff.size(); ++m) {
      const double phase = 2.0 * n_steps * std::atan(stepper.theta * free.values[m]);
      coeff[m] *= Complex(std::cos(phase), std::sin(phase));
    }
    return Eigen::VectorXcd(free.q * coeff);
  };

  WeakAcRecord rec;
  Eigen::VectorXcd u = u0;
  long long done = 0;
  Eigen::VectorXcd v_prev;
  for (int j = 0; j <= doublings; ++j) {
    const double horizon = t_initial * std::pow(2.0, j);
    const long long target = std::llround(horizon / dt);
    for (; done < target; ++done) {
      stepper.step(u);
      rec.leakage = std::max(rec.leakage, tail_mass(model.grid(), u));
      if (rec.leakage > 1e-3) throw BoxTooSmallError(rec.leakage);
    }
    const Eigen::VectorXcd v = back_map(u, done);
    rec.horizons.push_back(horizon);
    rec.v_norms.push_back(grid_norm(model.grid(), v));
    if (j > 0) rec.increments.push_back(grid_norm(model.grid(), v - v_prev));
    v_prev = v;
  }
  return rec;
}

}  // namespace dscat
