#pragma once

#include <span>
#include <vector>

namespace collapse {

/// Implicit operator (I - dt K D2) on a nonuniform grid with Dirichlet ends,
/// where K is a nonnegative nodal coefficient and D2 the standard three-point
/// second difference. Coefficients are precomputed once per grid.
class ImplicitDiffusion {
 public:
  ImplicitDiffusion() = default;
  /// `coefficient[i]` multiplies the second derivative at node i.
  ImplicitDiffusion(std::span<const double> x, std::span<const double> coefficient);

  std::size_t size() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  /// Solves (I - dt K D2) y = rhs on interior nodes, with y[0] = left and
  /// y[n-1] = right. `rhs` is overwritten with the solution.
  void solve(double dt, double left, double right, std::span<double> rhs) const;

  /// (K D2 y)_i at interior node i.
  double apply(std::span<const double> y, std::size_t i) const;

 private:
  std::vector<double> lower_;  // K_i * 2 / ((h_l + h_r) h_l)
  std::vector<double> upper_;  // K_i * 2 / ((h_l + h_r) h_r)
};

/// Solves (I - dt L) y = rhs on interior nodes where L has off-diagonals
/// lower[i], upper[i] and zero row sums; y[0] = left, y[n-1] = right.
void solve_zero_row_sum(double dt, std::span<const double> lower,
                        std::span<const double> upper, double left, double right,
                        std::span<double> rhs);

/// Off-diagonals of an exponentially fitted three-point stencil for
/// K y'' + c y' at a node with spacings hl, hr and K > 0. Both are positive
/// for every c; c = 0 gives the central second difference and |c| h / K → ∞
/// gives one-sided upwinding.
void exponential_fit_coefficients(double hl, double hr, double K, double c,
                                  double& lower, double& upper);

/// Thomas algorithm for a(i) y(i-1) + b(i) y(i) + c(i) y(i+1) = d(i).
/// a[0] and c[n-1] are ignored. `d` is overwritten with the solution.
void solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                       std::span<const double> c, std::span<double> d);

}  // namespace collapse
