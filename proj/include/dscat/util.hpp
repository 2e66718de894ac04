#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <vector>

namespace dscat {

/// LU factorization of a tridiagonal matrix with partial pivoting (gtsv
/// style: pivoting fills one extra superdiagonal). Factor once, solve many.
class TridiagLU {
 public:
  using Complex = std::complex<double>;

  TridiagLU() = default;
  /// lower/upper have size n-1, diag has size n.
  TridiagLU(const Eigen::VectorXcd& lower, const Eigen::VectorXcd& diag,
            const Eigen::VectorXcd& upper);

  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
  bool singular() const { return singular_; }

 private:
  int n_ = 0;
  Eigen::VectorXcd dl_, d_, du_, du2_;
  std::vector<int> pivot_;
  bool singular_ = false;
};

/// y = T x for a tridiagonal T given by its three diagonals.
Eigen::VectorXcd tridiag_apply(const Eigen::VectorXcd& lower,
                               const Eigen::VectorXcd& diag,
                               const Eigen::VectorXcd& upper,
                               const Eigen::VectorXcd& x);

/// Deterministic index-parallel loop: results must be written to
/// preallocated per-index slots. threads <= 0 selects hardware concurrency.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

}  // namespace dscat
