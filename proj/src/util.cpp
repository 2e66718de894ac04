#include "dscat/util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace dscat {

TridiagLU::TridiagLU(const Eigen::VectorXcd& lower, const Eigen::VectorXcd& diag,
                     const Eigen::VectorXcd& upper) {
  n_ = static_cast<int>(diag.size());
  if (lower.size() != n_ - 1 || upper.size() != n_ - 1)
    throw std::invalid_argument("TridiagLU: band sizes inconsistent");
  dl_ = lower;
  d_ = diag;
  du_ = upper;
  du2_ = Eigen::VectorXcd::Zero(std::max(n_ - 2, 0));
  pivot_.assign(n_, 0);

  // LAPACK gttrf-style factorization with partial pivoting.
  for (int i = 0; i < n_ - 1; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      pivot_[i] = 0;
      if (d_[i] == Complex(0.0)) { singular_ = true; continue; }
      const Complex f = dl_[i] / d_[i];
      dl_[i] = f;
      d_[i + 1] -= f * du_[i];
      if (i < n_ - 2) du2_[i] = Complex(0.0);
    } else {
      pivot_[i] = 1;
      const Complex f = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = f;
      const Complex tmp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = tmp - f * d_[i + 1];
      if (i < n_ - 2) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -f * du_[i + 1];
      }
    }
  }
  if (n_ > 0 && d_[n_ - 1] == Complex(0.0)) singular_ = true;
}

Eigen::VectorXcd TridiagLU::solve(const Eigen::VectorXcd& rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("TridiagLU::solve: size mismatch");
  Eigen::VectorXcd b = rhs;
  for (int i = 0; i < n_ - 1; ++i) {
    if (pivot_[i] == 0) {
      b[i + 1] -= dl_[i] * b[i];
    } else {
      const Complex tmp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tmp - dl_[i] * b[i];
    }
  }
  for (int i = n_ - 1; i >= 0; --i) {
    Complex s = b[i];
    if (i < n_ - 1) s -= du_[i] * b[i + 1];
    if (i < n_ - 2) s -= du2_[i] * b[i + 2];
    b[i] = s / d_[i];
  }
  return b;
}

Eigen::VectorXcd tridiag_apply(const Eigen::VectorXcd& lower,
                               const Eigen::VectorXcd& diag,
                               const Eigen::VectorXcd& upper,
                               const Eigen::VectorXcd& x) {
  const int n = static_cast<int>(diag.size());
  Eigen::VectorXcd y(n);
  for (int i = 0; i < n; ++i) {
    std::complex<double> s = diag[i] * x[i];
    if (i > 0) s += lower[i - 1] * x[i - 1];
    if (i < n - 1) s += upper[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, n);
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next(0);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != x.size())
    throw std::invalid_argument("fit_line: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss += e * e;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
    m = 0.5 * (m + values[mid - 1]);
  }
  return m;
}

}  // namespace dscat
