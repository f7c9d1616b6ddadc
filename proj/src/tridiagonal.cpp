#include "collapse/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "collapse/radial_model.hpp"

namespace collapse {

void solve_tridiagonal(std::span<const double> a, std::span<const double> b,
                       std::span<const double> c, std::span<double> d) {
  const std::size_t n = d.size();
  if (a.size() != n || b.size() != n || c.size() != n) {
    throw InputError("solve_tridiagonal: size mismatch");
  }
  if (n == 0) return;
  std::vector<double> cp(n);
  double denom = b[0];
  cp[0] = c[0] / denom;
  d[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = b[i] - a[i] * cp[i - 1];
    cp[i] = c[i] / denom;
    d[i] = (d[i] - a[i] * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= cp[i] * d[i + 1];
}

ImplicitDiffusion::ImplicitDiffusion(std::span<const double> x,
                                     std::span<const double> coefficient)
    : lower_(x.size(), 0.0), upper_(x.size(), 0.0) {
  if (x.size() != coefficient.size() || x.size() < 3) {
    throw InputError("ImplicitDiffusion: need at least three nodes and matching sizes");
  }
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double hl = x[i] - x[i - 1];
    const double hr = x[i + 1] - x[i];
    const double k = 2.0 * coefficient[i] / (hl + hr);
    lower_[i] = k / hl;
    upper_[i] = k / hr;
  }
}

void ImplicitDiffusion::solve(double dt, double left, double right,
                              std::span<double> rhs) const {
  solve_zero_row_sum(dt, lower_, upper_, left, right, rhs);
}

void solve_zero_row_sum(double dt, std::span<const double> lower,
                        std::span<const double> upper, double left, double right,
                        std::span<double> rhs) {
  const std::size_t n = rhs.size();
  if (lower.size() != n || upper.size() != n || n < 3) {
    throw InputError("solve_zero_row_sum: size mismatch");
  }
  // Forward sweep over interior unknowns 1..n-2 with the Dirichlet values
  // folded into the right-hand side.
  std::vector<double> cp(n, 0.0);
  rhs[0] = left;
  rhs[n - 1] = right;
  double prev_c = 0.0;
  double prev_d = left;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = -dt * lower[i];
    const double c = -dt * upper[i];
    const double b = 1.0 + dt * (lower[i] + upper[i]);
    const double denom = b - a * prev_c;
    double d = rhs[i] - a * prev_d;
    if (i + 2 == n) d -= c * right;
    cp[i] = (i + 2 == n) ? 0.0 : c / denom;
    rhs[i] = d / denom;
    prev_c = cp[i];
    prev_d = rhs[i];
  }
  for (std::size_t i = n - 2; i-- > 1;) rhs[i] -= cp[i] * rhs[i + 1];
}

double ImplicitDiffusion::apply(std::span<const double> y, std::size_t i) const {
  return lower_[i] * (y[i - 1] - y[i]) + upper_[i] * (y[i + 1] - y[i]);
}

// phi1(z) = (e^z - 1)/z. The stencil reproduces constants, x and
// exp(-c x / K) exactly; S = (phi1(x) - phi1(-y))/(x + y).
namespace {

double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

}  // namespace

void exponential_fit_coefficients(double hl, double hr, double K, double c,
                                  double& lower, double& upper) {
  if (!(K > 0.0) || !(hl > 0.0) || !(hr > 0.0)) {
    throw InputError("exponential_fit_coefficients: K and spacings must be positive");
  }
  const double x = c / K * hl;
  const double y = c / K * hr;
  const double base = K / (hl + hr);
  if (std::max(std::abs(x), std::abs(y)) < 1e-2) {
    const double x2 = x * x, y2 = y * y;
    const double S = 0.5 + (x - y) / 6.0 + (x2 - x * y + y2) / 24.0 +
                     (x - y) * (x2 + y2) / 120.0 +
                     (x2 * x2 - x2 * x * y + x2 * y2 - x * y * y2 + y2 * y2) / 720.0;
    lower = base / hl * phi1(-y) / S;
    upper = base / hr * phi1(x) / S;
    return;
  }
  if (c > 0.0) {
    const double r = phi1(-y) / phi1(x);
    lower = base / hl * (x + y) * r / (1.0 - r);
    upper = base / hr * (x + y) / (1.0 - r);
  } else {
    const double r = phi1(x) / phi1(-y);
    lower = base / hl * -(x + y) / (1.0 - r);
    upper = base / hr * -(x + y) * r / (1.0 - r);
  }
}

}  // namespace collapse
