// Compiled with -mavx2 only. FMA is deliberately not enabled for this
// translation unit so that contraction cannot change rounding relative to
// the scalar reference.

#include <algorithm>
#include <cmath>

#include "collapse/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace collapse::simd::avx2 {

#if defined(__AVX2__)

namespace {

struct Vec4d {
  __m256d v;

  Vec4d() : v(_mm256_setzero_pd()) {}
  Vec4d(__m256d x) : v(x) {}  // NOLINT(google-explicit-constructor)
  Vec4d(double x) : v(_mm256_set1_pd(x)) {}  // NOLINT(google-explicit-constructor)

  static Vec4d load(const double* p) { return _mm256_loadu_pd(p); }
  void store(double* p) const { _mm256_storeu_pd(p, v); }
};

inline Vec4d operator+(Vec4d a, Vec4d b) { return _mm256_add_pd(a.v, b.v); }
inline Vec4d operator-(Vec4d a, Vec4d b) { return _mm256_sub_pd(a.v, b.v); }
inline Vec4d operator*(Vec4d a, Vec4d b) { return _mm256_mul_pd(a.v, b.v); }
inline Vec4d operator/(Vec4d a, Vec4d b) { return _mm256_div_pd(a.v, b.v); }
inline Vec4d operator+(Vec4d a, double b) { return a + Vec4d(b); }
inline Vec4d operator-(Vec4d a, double b) { return a - Vec4d(b); }
inline Vec4d operator*(Vec4d a, double b) { return a * Vec4d(b); }
inline Vec4d operator/(Vec4d a, double b) { return a / Vec4d(b); }
inline Vec4d operator+(double a, Vec4d b) { return Vec4d(a) + b; }
inline Vec4d operator-(double a, Vec4d b) { return Vec4d(a) - b; }
inline Vec4d operator*(double a, Vec4d b) { return Vec4d(a) * b; }
inline Vec4d operator/(double a, Vec4d b) { return Vec4d(a) / b; }

inline Vec4d vsqrt(Vec4d x) { return _mm256_sqrt_pd(x.v); }
inline Vec4d select_positive(Vec4d c, Vec4d a, Vec4d b) {
  const __m256d mask = _mm256_cmp_pd(c.v, _mm256_setzero_pd(), _CMP_GT_OQ);
  return _mm256_blendv_pd(b.v, a.v, mask);
}
inline Vec4d select_nonnegative(Vec4d c, Vec4d a, Vec4d b) {
  const __m256d mask = _mm256_cmp_pd(c.v, _mm256_setzero_pd(), _CMP_GE_OQ);
  return _mm256_blendv_pd(b.v, a.v, mask);
}
inline Vec4d vmax(Vec4d a, Vec4d b) { return _mm256_max_pd(a.v, b.v); }
// Same NaN behaviour as the scalar `a < b ? a : b`.
inline Vec4d vmin(Vec4d a, Vec4d b) {
  const __m256d mask = _mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ);
  return _mm256_blendv_pd(b.v, a.v, mask);
}

inline double hmax(Vec4d a) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, a.v);
  return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}

}  // namespace

bool compiled() { return true; }

ResidualRowMax residual_row_4d(std::span<const double> s, const Sub4DTime& c,
                               double mu_star, double delta) {
  const std::size_t n = s.size();
  Vec4d p_acc(-1e300);
  Vec4d q_acc(-1e300);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const Vec4d si = Vec4d::load(s.data() + i);
    const Vec4d q = vsqrt(si);
    const Jet<Vec4d> u = sub4d_u(si, q, c);
    const Jet<Vec4d> w = sub4d_w(si, q, c);
    p_acc = vmax(p_acc, residual_P(si, q, u, w, mu_star));
    q_acc = vmax(q_acc, residual_Q(si, q, u, w, delta));
  }
  ResidualRowMax out{hmax(p_acc), hmax(q_acc)};
  if (i < n) {
    const ResidualRowMax tail = scalar::residual_row_4d(s.subspan(i), c, mu_star, delta);
    out.p_max = std::max(out.p_max, tail.p_max);
    out.q_max = std::max(out.q_max, tail.q_max);
  }
  return out;
}

double theta_row_2d(std::span<const double> rho, const Sub2DTime& c,
                    double mass_m) {
  const std::size_t n = rho.size();
  Vec4d acc(-1e300);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const Vec4d r = Vec4d::load(rho.data() + i);
    acc = vmax(acc, residual_Theta(r, sub2d_u(r, c), mass_m));
  }
  double out = hmax(acc);
  if (i < n) out = std::max(out, scalar::theta_row_2d(rho.subspan(i), c, mass_m));
  return out;
}

double upwind_transport(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> phi, std::span<const double> X,
                        double A, double B, double dt, std::span<double> out) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  Vec4d speed(0.0);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const Vec4d xi = Vec4d::load(x.data() + i);
    const Vec4d Xi = Vec4d::load(X.data() + i);
    const Vec4d prev = Vec4d::load(phi.data() + i - 1);
    const Vec4d cur = Vec4d::load(phi.data() + i);
    const Vec4d next = Vec4d::load(phi.data() + i + 1);
    const Vec4d hl = Vec4d::load(inv_h.data() + i);
    const Vec4d hr = Vec4d::load(inv_h.data() + i + 1);
    const Vec4d rate = upwind_rate(xi, Xi, prev, cur, next, hl, hr, A, B);
    (cur + dt * rate).store(out.data() + i);
    speed = vmax(speed, upwind_speed(xi, Xi, hl, hr, A, B));
  }
  double result = hmax(speed);
  if (i + 1 < n) {
    // Tail through the scalar translation unit so no double instantiation of
    // the templates is emitted with AVX encodings here.
    const std::size_t k = i - 1;
    result = std::max(result, scalar::upwind_transport(
                                  x.subspan(k), inv_h.subspan(k), phi.subspan(k),
                                  X.subspan(k), A, B, dt, out.subspan(k)));
  }
  return result;
}

double upwind_max_speed(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> X, double A, double B) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  Vec4d speed(0.0);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const Vec4d xi = Vec4d::load(x.data() + i);
    const Vec4d Xi = Vec4d::load(X.data() + i);
    const Vec4d hl = Vec4d::load(inv_h.data() + i);
    const Vec4d hr = Vec4d::load(inv_h.data() + i + 1);
    speed = vmax(speed, upwind_speed(xi, Xi, hl, hr, A, B));
  }
  double result = hmax(speed);
  if (i + 1 < n) {
    const std::size_t k = i - 1;
    result = std::max(result, scalar::upwind_max_speed(x.subspan(k), inv_h.subspan(k),
                                                       X.subspan(k), A, B));
  }
  return result;
}

void hybrid_coefficients(std::span<const double> x, std::span<const double> inv_h,
                         std::span<const double> diff_lower,
                         std::span<const double> diff_upper,
                         std::span<const double> X, double A, double B,
                         std::span<double> lower, std::span<double> upper) {
  const std::size_t n = x.size();
  if (n < 3) return;
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    Vec4d lo;
    Vec4d up;
    collapse::hybrid_coefficients(Vec4d::load(x.data() + i), Vec4d::load(X.data() + i),
                        Vec4d::load(inv_h.data() + i), Vec4d::load(inv_h.data() + i + 1),
                        Vec4d::load(diff_lower.data() + i),
                        Vec4d::load(diff_upper.data() + i), A, B, lo, up);
    lo.store(lower.data() + i);
    up.store(upper.data() + i);
  }
  if (i + 1 < n) {
    const std::size_t k = i - 1;
    scalar::hybrid_coefficients(x.subspan(k), inv_h.subspan(k), diff_lower.subspan(k),
                                diff_upper.subspan(k), X.subspan(k), A, B,
                                lower.subspan(k), upper.subspan(k));
  }
}

#else  // !__AVX2__

bool compiled() { return false; }

ResidualRowMax residual_row_4d(std::span<const double> s, const Sub4DTime& c,
                               double mu_star, double delta) {
  return scalar::residual_row_4d(s, c, mu_star, delta);
}
double theta_row_2d(std::span<const double> rho, const Sub2DTime& c, double mass_m) {
  return scalar::theta_row_2d(rho, c, mass_m);
}
double upwind_transport(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> phi, std::span<const double> X,
                        double A, double B, double dt, std::span<double> out) {
  return scalar::upwind_transport(x, inv_h, phi, X, A, B, dt, out);
}
double upwind_max_speed(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> X, double A, double B) {
  return scalar::upwind_max_speed(x, inv_h, X, A, B);
}

void hybrid_coefficients(std::span<const double> x, std::span<const double> inv_h,
                         std::span<const double> diff_lower,
                         std::span<const double> diff_upper,
                         std::span<const double> X, double A, double B,
                         std::span<double> lower, std::span<double> upper) {
  scalar::hybrid_coefficients(x, inv_h, diff_lower, diff_upper, X, A, B, lower, upper);
}

#endif

}  // namespace collapse::simd::avx2
