#include <algorithm>
#include <cmath>

#include "collapse/kernels.hpp"

namespace collapse::simd::scalar {

ResidualRowMax residual_row_4d(std::span<const double> s, const Sub4DTime& c,
                               double mu_star, double delta) {
  ResidualRowMax out;
  for (double si : s) {
    const double q = std::sqrt(si);
    const Jet<double> u = sub4d_u(si, q, c);
    const Jet<double> w = sub4d_w(si, q, c);
    out.p_max = std::max(out.p_max, residual_P(si, q, u, w, mu_star));
    out.q_max = std::max(out.q_max, residual_Q(si, q, u, w, delta));
  }
  return out;
}

double theta_row_2d(std::span<const double> rho, const Sub2DTime& c,
                    double mass_m) {
  double out = -1e300;
  for (double r : rho) out = std::max(out, residual_Theta(r, sub2d_u(r, c), mass_m));
  return out;
}

double upwind_transport(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> phi, std::span<const double> X,
                        double A, double B, double dt, std::span<double> out) {
  double speed = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double rate = upwind_rate(x[i], X[i], phi[i - 1], phi[i], phi[i + 1],
                                    inv_h[i], inv_h[i + 1], A, B);
    out[i] = phi[i] + dt * rate;
    speed = std::max(speed, upwind_speed(x[i], X[i], inv_h[i], inv_h[i + 1], A, B));
  }
  return speed;
}

double upwind_max_speed(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> X, double A, double B) {
  double speed = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    speed = std::max(speed, upwind_speed(x[i], X[i], inv_h[i], inv_h[i + 1], A, B));
  }
  return speed;
}

void hybrid_coefficients(std::span<const double> x, std::span<const double> inv_h,
                         std::span<const double> diff_lower,
                         std::span<const double> diff_upper,
                         std::span<const double> X, double A, double B,
                         std::span<double> lower, std::span<double> upper) {
  const std::size_t n = x.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    collapse::hybrid_coefficients(x[i], X[i], inv_h[i], inv_h[i + 1], diff_lower[i],
                        diff_upper[i], A, B, lower[i], upper[i]);
  }
}

}  // namespace collapse::simd::scalar
