#pragma once

// Closed-form subsolutions, their analytic partial derivatives, and the
// transformed-coordinate residual operators. Every function is a template
// over the arithmetic type so that the scalar reference path and the SIMD
// path instantiate exactly the same expression trees. A type T must provide
// + - * / with double on either side, plus `vsqrt(T)` and
// `select_positive(T c, T a, T b)` (a where c > 0, else b),
// `select_nonnegative` (a where c >= 0) and `vmin` found by ADL.

#include <cmath>

namespace collapse {

inline double vsqrt(double x) { return std::sqrt(x); }
inline double select_positive(double c, double a, double b) {
  return c > 0.0 ? a : b;
}
inline double select_nonnegative(double c, double a, double b) {
  return c >= 0.0 ? a : b;
}
inline double vmin(double a, double b) { return a < b ? a : b; }

/// Value and partial derivatives of one transformed function at a point.
template <class T>
struct Jet {
  T value{};
  T d_s{};
  T d_ss{};
  T d_t{};
};

/// Time-only scalars of the 4D pair: τ = ε - ℓt, a = 2^5 e^{(γ+1)τ}, b = 8e^τ.
struct Sub4DTime {
  double tau = 0.0;
  double tau3 = 0.0;
  double a = 0.0;
  double b = 0.0;
  double ell = 0.0;
  double gamma = 0.0;

  static Sub4DTime at(double eps, double ell, double gamma, double t) {
    Sub4DTime c;
    c.tau = eps - ell * t;
    c.tau3 = c.tau * c.tau * c.tau;
    c.a = 32.0 * std::exp((gamma + 1.0) * c.tau);
    c.b = 8.0 * std::exp(c.tau);
    c.ell = ell;
    c.gamma = gamma;
    return c;
  }
};

/// ū(s,t) = a (s^{3/2} + 3τ³s) / (s^{1/2} + τ³)³ with exact partials.
/// Requires s > 0 for the second derivative.
template <class T>
Jet<T> sub4d_u(const T& s, const T& q, const Sub4DTime& c) {
  const double tau6 = c.tau3 * c.tau3;
  const T D = q + c.tau3;
  const T D2 = D * D;
  const T D3 = D2 * D;
  const T D4 = D2 * D2;
  const T shape = s * (q + 3.0 * c.tau3) / D3;
  const double a_dot = -c.ell * (c.gamma + 1.0) * c.a;
  Jet<T> j;
  j.value = c.a * shape;
  j.d_s = (3.0 * c.a * tau6) / D4;
  j.d_ss = (-6.0 * c.a * tau6) / (q * D4 * D);
  j.d_t = a_dot * shape + (18.0 * c.a * c.ell * c.tau * c.tau * c.tau3) * s / D4;
  return j;
}

/// w̄(s,t) = b s / (s^{1/2} + τ³) with exact partials.
template <class T>
Jet<T> sub4d_w(const T& s, const T& q, const Sub4DTime& c) {
  const T D = q + c.tau3;
  const T D2 = D * D;
  Jet<T> j;
  j.value = c.b * s / D;
  j.d_s = c.b * (c.tau3 + 0.5 * q) / D2;
  j.d_ss = (-0.25 * c.b) * (1.0 + (3.0 * c.tau3) / q) / (D2 * D);
  j.d_t = (-c.ell + (3.0 * c.tau * c.tau * c.ell) / D) * j.value;
  return j;
}

/// 𝒫(φ,ψ) = φ_t - 16 s^{3/2} φ_ss - 4 φ_s (ψ - μ s/4).
template <class T>
T residual_P(const T& s, const T& q, const Jet<T>& phi, const Jet<T>& psi,
             double mu) {
  return phi.d_t - 16.0 * s * q * phi.d_ss - 4.0 * phi.d_s * (psi.value - 0.25 * mu * s);
}

/// 𝒬(φ,ψ) = ψ_t - 16 s^{3/2} ψ_ss + δψ - φ.
template <class T>
T residual_Q(const T& s, const T& q, const Jet<T>& phi, const Jet<T>& psi,
             double delta) {
  return psi.d_t - 16.0 * s * q * psi.d_ss + delta * psi.value - phi.value;
}

/// Time-only scalars of the 2D subsolution: a = 4e^τ.
struct Sub2DTime {
  double tau = 0.0;
  double tau3 = 0.0;
  double a = 0.0;
  double ell = 0.0;

  static Sub2DTime at(double eps, double ell, double t) {
    Sub2DTime c;
    c.tau = eps - ell * t;
    c.tau3 = c.tau * c.tau * c.tau;
    c.a = 4.0 * std::exp(c.tau);
    c.ell = ell;
    return c;
  }
};

/// ū(ρ,t) = aρ/(ρ+τ³); d_s/d_ss hold ρ-derivatives.
template <class T>
Jet<T> sub2d_u(const T& rho, const Sub2DTime& c) {
  const T D = rho + c.tau3;
  const T D2 = D * D;
  Jet<T> j;
  j.value = c.a * rho / D;
  j.d_s = (c.a * c.tau3) / D2;
  j.d_ss = (-2.0 * c.a * c.tau3) / (D2 * D);
  j.d_t = (-c.ell + (3.0 * c.tau * c.tau * c.ell) / D) * j.value;
  return j;
}

/// Θf = f_t - 4ρ f_ρρ - 2 f_ρ (f - mρ/2π).
template <class T>
T residual_Theta(const T& rho, const Jet<T>& f, double mass_m) {
  constexpr double kTwoPi = 6.283185307179586;
  return f.d_t - 4.0 * rho * f.d_ss - 2.0 * f.d_s * (f.value - (mass_m / kTwoPi) * rho);
}

/// Explicit upwind transport update for φ_t = A (X - B x) φ_x on a
/// nonuniform grid: the slope is taken downstream of the characteristic,
/// i.e. forward when the coefficient is positive. inv_h[i] = 1/(x_i - x_{i-1}).
template <class T>
T upwind_rate(const T& x, const T& X, const T& phi_prev, const T& phi,
              const T& phi_next, const T& inv_h_left, const T& inv_h_right,
              double A, double B) {
  const T c = A * (X - B * x);
  const T forward = (phi_next - phi) * inv_h_right;
  const T backward = (phi - phi_prev) * inv_h_left;
  return c * select_positive(c, forward, backward);
}

/// |c| / Δx_upwind, the inverse of the local CFL time step.
template <class T>
T upwind_speed(const T& x, const T& X, const T& inv_h_left,
               const T& inv_h_right, double A, double B) {
  const T c = A * (X - B * x);
  return select_positive(c, c * inv_h_right, (-1.0 * c) * inv_h_left);
}

/// Off-diagonal coefficients of the implicit operator K φ_xx + c φ_x at one
/// interior node, c = A (X - B x). The three-point central stencil is used
/// when both coefficients stay nonnegative (cell Péclet number at most one);
/// otherwise the transport falls back to the upwind one-sided difference.
/// Rows of the operator sum to zero, so the diagonal is -(lower + upper).
/// diff_lower/diff_upper are the diffusion parts K·2/((h_l+h_r)h_{l,r}).
template <class T>
void hybrid_coefficients(const T& x, const T& X, const T& inv_h_left,
                         const T& inv_h_right, const T& diff_lower,
                         const T& diff_upper, double A, double B, T& lower,
                         T& upper) {
  const T c = A * (X - B * x);
  const T sum = inv_h_left + inv_h_right;
  const T central_lower = diff_lower - c * (inv_h_left * inv_h_left / sum);
  const T central_upper = diff_upper + c * (inv_h_right * inv_h_right / sum);
  const T upwind_lower = diff_lower + select_positive(c, T(0.0), (-1.0 * c) * inv_h_left);
  const T upwind_upper = diff_upper + select_positive(c, c * inv_h_right, T(0.0));
  const T ok = vmin(central_lower, central_upper);
  lower = select_nonnegative(ok, central_lower, upwind_lower);
  upper = select_nonnegative(ok, central_upper, upwind_upper);
}

}  // namespace collapse
