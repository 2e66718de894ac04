#include "dscat/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dscat/green.hpp"

namespace dscat {

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = node(i);
  return r;
}

RadialGrid RadialGrid::refined() const { return build_radial_grid(r_max, 2 * n); }

int RadialGrid::nodes_within(double radius) const {
  // count of i >= 1 with i*h <= radius (+ tolerance for exact-edge nodes)
  int m = static_cast<int>(std::floor(radius / h + 1e-9));
  return std::clamp(m, 0, n);
}

RadialGrid build_radial_grid(double r_max, int n) {
  if (!(r_max > 0.0)) throw std::invalid_argument("build_radial_grid: r_max must be > 0");
  if (n < 16) throw std::invalid_argument("build_radial_grid: n must be >= 16");
  RadialGrid g;
  g.r_max = r_max;
  g.n = n;
  g.h = r_max / n;
  return g;
}

PotentialSpec PotentialSpec::piecewise(std::vector<std::pair<double, double>> steps) {
  PotentialSpec p;
  if (steps.empty()) return p;
  double prev = 0.0;
  for (const auto& [radius, value] : steps) {
    if (!(radius > prev))
      throw std::invalid_argument("PotentialSpec: radii must be positive and increasing");
    if (!std::isfinite(value))
      throw std::invalid_argument("PotentialSpec: values must be finite");
    prev = radius;
  }
  p.kind_ = Kind::Piecewise;
  p.data_ = std::move(steps);
  p.support_radius_ = p.data_.back().first;
  return p;
}

PotentialSpec PotentialSpec::tabulated(std::vector<std::pair<double, double>> points) {
  PotentialSpec p;
  if (points.empty()) return p;
  double prev = 0.0;
  for (const auto& [r, value] : points) {
    if (!(r > prev))
      throw std::invalid_argument("PotentialSpec: sample radii must be positive and increasing");
    if (!std::isfinite(value))
      throw std::invalid_argument("PotentialSpec: values must be finite");
    prev = r;
  }
  p.kind_ = Kind::Tabulated;
  p.data_ = std::move(points);
  p.support_radius_ = p.data_.back().first;
  return p;
}

double PotentialSpec::operator()(double r) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Piecewise: {
      if (r > support_radius_) return 0.0;
      for (const auto& [radius, value] : data_)
        if (r <= radius) return value;
      return 0.0;
    }
    case Kind::Tabulated: {
      if (r > support_radius_) return 0.0;
      if (r <= data_.front().first) return data_.front().second;
      for (size_t i = 1; i < data_.size(); ++i) {
        if (r <= data_[i].first) {
          const auto& [r0, v0] = data_[i - 1];
          const auto& [r1, v1] = data_[i];
          const double t = (r - r0) / (r1 - r0);
          return v0 + t * (v1 - v0);
        }
      }
      return 0.0;
    }
  }
  return 0.0;
}

bool PotentialSpec::is_zero() const {
  if (kind_ == Kind::Zero) return true;
  for (const auto& [r, v] : data_)
    if (v != 0.0) return false;
  return true;
}

std::vector<double> PotentialSpec::breakpoints() const {
  std::vector<double> b;
  for (const auto& [r, v] : data_) b.push_back(r);
  return b;
}

PotentialSpec PotentialSpec::squared() const {
  PotentialSpec p = *this;
  for (auto& [r, v] : p.data_) v *= v;
  return p;
}

Eigen::VectorXd sample_potential(const PotentialSpec& spec, const RadialGrid& grid) {
  if (spec.support_radius() > grid.r_max + 1e-12)
    throw std::invalid_argument("sample_potential: support exceeds the grid box");
  Eigen::VectorXd a(grid.n);
  for (int i = 0; i < grid.n; ++i) a[i] = spec(grid.node(i));
  return a;
}

Channel::Channel(int ell_, double lambda_) : ell(ell_), lambda(lambda_) {
  if (ell < 0 || ell > kMaxEll)
    throw std::invalid_argument("Channel: ell out of supported range [0,64]");
  if (!(lambda > 0.0)) throw std::invalid_argument("Channel: lambda must be > 0");
  k = std::sqrt(lambda);
}

void OpticalModel::finalize() {
  w_has_negative_ = (w_.size() > 0) && (w_.minCoeff() < 0.0);
  support_radius_ = std::max(v_spec_.support_radius(), w_spec_.support_radius());
  support_nodes_ = std::max(grid_.nodes_within(support_radius_), 1);
}

OpticalModel OpticalModel::make(PotentialSpec v, PotentialSpec w, double coupling,
                                RadialGrid grid) {
  OpticalModel m;
  m.v_spec_ = std::move(v);
  m.w_spec_ = std::move(w);
  m.coupling_ = coupling;
  m.grid_ = grid;
  m.v_ = sample_potential(m.v_spec_, grid);
  m.w_ = sample_potential(m.w_spec_, grid);
  m.c_ = m.w_.cwiseMax(0.0).cwiseSqrt();
  m.finalize();
  return m;
}

OpticalModel OpticalModel::from_c_samples(PotentialSpec v, Eigen::VectorXd c,
                                          double coupling, RadialGrid grid) {
  if (c.size() != grid.n)
    throw std::invalid_argument("OpticalModel::from_c_samples: sample count mismatch");
  OpticalModel m;
  m.v_spec_ = std::move(v);
  m.coupling_ = coupling;
  m.grid_ = grid;
  m.v_ = sample_potential(m.v_spec_, grid);
  m.c_ = std::move(c);
  m.w_ = m.c_.cwiseAbs2();
  m.detached_c_ = true;
  // Tabulated interpolant of w for off-grid evaluation; trailing zeros
  // trimmed so the support block stays tight.
  int last = grid.n - 1;
  while (last > 0 && m.w_[last] == 0.0) --last;
  const int keep = std::min(last + 2, grid.n);
  std::vector<std::pair<double, double>> pts(keep);
  for (int i = 0; i < keep; ++i) pts[i] = {grid.node(i), m.w_[i]};
  m.w_spec_ = m.w_.isZero(0.0) ? PotentialSpec{} : PotentialSpec::tabulated(std::move(pts));
  m.finalize();
  return m;
}

OpticalModel OpticalModel::with_coupling(double coupling) const {
  OpticalModel m = *this;
  m.coupling_ = coupling;
  return m;
}

OpticalModel OpticalModel::refined() const {
  const RadialGrid fine = grid_.refined();
  if (!detached_c_) return make(v_spec_, w_spec_, coupling_, fine);
  // linear interpolation of the raw c samples onto the finer mesh
  std::vector<std::pair<double, double>> pts(grid_.n);
  for (int i = 0; i < grid_.n; ++i) pts[i] = {grid_.node(i), c_[i]};
  const PotentialSpec c_interp = PotentialSpec::tabulated(std::move(pts));
  Eigen::VectorXd cf(fine.n);
  for (int i = 0; i < fine.n; ++i) cf[i] = c_interp(fine.node(i));
  return from_c_samples(v_spec_, std::move(cf), coupling_, fine);
}

ValidationReport validate_hypotheses(const OpticalModel& model) {
  ValidationReport rep;

  rep.w_nonnegative = !model.w_has_negative();
  if (!rep.w_nonnegative) rep.messages.push_back("W has negative samples");

  const double rmax = model.grid().r_max;
  rep.compact_support =
      model.v_spec().support_radius() <= rmax + 1e-12 &&
      model.w_spec().support_radius() <= rmax + 1e-12 &&
      model.v().allFinite() && model.w().allFinite();
  if (!rep.compact_support) rep.messages.push_back("support or finiteness check failed");

  // Birman-Schwinger margin at zero energy: distance of 1 from
  // spec(-G0(0) V) in the s-wave on the grid.
  const int m = std::max(model.grid().nodes_within(model.v_spec().support_radius()), 1);
  if (model.v_spec().is_zero()) {
    rep.zero_energy_margin = 1.0;  // spec(0) = {0}
  } else {
    const Eigen::MatrixXd g0 = zero_energy_green_matrix(model.grid(), 0, m);
    Eigen::MatrixXd bs = -g0;
    for (int q = 0; q < m; ++q) bs.col(q) *= model.v()[q];
    const Eigen::VectorXcd mu = Eigen::EigenSolver<Eigen::MatrixXd>(bs, false).eigenvalues();
    double margin = std::abs(std::complex<double>(1.0, 0.0) - mu[0]);
    for (int i = 1; i < mu.size(); ++i)
      margin = std::min(margin, std::abs(std::complex<double>(1.0, 0.0) - mu[i]));
    rep.zero_energy_margin = margin;
  }
  rep.zero_energy_regular = rep.zero_energy_margin >= kZeroEnergyMarginFloor;
  if (!rep.zero_energy_regular)
    rep.messages.push_back("zero-energy Birman-Schwinger margin below floor");

  return rep;
}

}  // namespace dscat
