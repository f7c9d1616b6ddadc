#include <atomic>
#include <stdexcept>

#include "collapse/kernels.hpp"

namespace collapse::simd {

namespace {

std::atomic<int> g_override{-1};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

}  // namespace

const char* to_string(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

Backend detected_backend() {
  static const Backend detected =
      avx2::compiled() && cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
  return detected;
}

Backend active_backend() {
  const int forced = g_override.load(std::memory_order_relaxed);
  return forced < 0 ? detected_backend() : static_cast<Backend>(forced);
}

void force_backend(std::optional<Backend> backend) {
  if (!backend) {
    g_override.store(-1);
    return;
  }
  if (*backend == Backend::Avx2 && detected_backend() != Backend::Avx2) {
    throw std::runtime_error("AVX2 kernels are not available on this machine");
  }
  g_override.store(static_cast<int>(*backend));
}

ResidualRowMax residual_row_4d(std::span<const double> s, const Sub4DTime& c,
                               double mu_star, double delta) {
  return active_backend() == Backend::Avx2
             ? avx2::residual_row_4d(s, c, mu_star, delta)
             : scalar::residual_row_4d(s, c, mu_star, delta);
}

double theta_row_2d(std::span<const double> rho, const Sub2DTime& c,
                    double mass_m) {
  return active_backend() == Backend::Avx2 ? avx2::theta_row_2d(rho, c, mass_m)
                                           : scalar::theta_row_2d(rho, c, mass_m);
}

double upwind_transport(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> phi, std::span<const double> X,
                        double A, double B, double dt, std::span<double> out) {
  return active_backend() == Backend::Avx2
             ? avx2::upwind_transport(x, inv_h, phi, X, A, B, dt, out)
             : scalar::upwind_transport(x, inv_h, phi, X, A, B, dt, out);
}

double upwind_max_speed(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> X, double A, double B) {
  return active_backend() == Backend::Avx2
             ? avx2::upwind_max_speed(x, inv_h, X, A, B)
             : scalar::upwind_max_speed(x, inv_h, X, A, B);
}

void hybrid_coefficients(std::span<const double> x, std::span<const double> inv_h,
                         std::span<const double> diff_lower,
                         std::span<const double> diff_upper,
                         std::span<const double> X, double A, double B,
                         std::span<double> lower, std::span<double> upper) {
  if (active_backend() == Backend::Avx2) {
    avx2::hybrid_coefficients(x, inv_h, diff_lower, diff_upper, X, A, B, lower, upper);
  } else {
    scalar::hybrid_coefficients(x, inv_h, diff_lower, diff_upper, X, A, B, lower, upper);
  }
}

}  // namespace collapse::simd
