#pragma once

// Data-parallel inner loops with a scalar reference and an AVX2 variant.
// The active variant is chosen once at runtime from CPUID; tests may force
// either one to check that both produce the same numbers.

#include <optional>
#include <span>

#include "collapse/closed_forms.hpp"

namespace collapse::simd {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend backend);

/// Best variant supported by this CPU and build.
Backend detected_backend();
/// Variant used by the dispatching entry points.
Backend active_backend();
/// Overrides (or with nullopt restores) the automatic choice. Requesting
/// Avx2 on a machine without it throws std::runtime_error.
void force_backend(std::optional<Backend> backend);

/// Per-row maxima of the 4D residuals. "scaled" divides by max(1, |a(t)|).
struct ResidualRowMax {
  double p_max = -1e300;
  double q_max = -1e300;
};

/// 𝒫_{μ★}(ū,w̄) and 𝒬(ū,w̄) over interior nodes s (all s > 0) at one time.
ResidualRowMax residual_row_4d(std::span<const double> s, const Sub4DTime& c,
                               double mu_star, double delta);
/// max Θū over interior nodes ρ (all ρ > 0) at one time.
double theta_row_2d(std::span<const double> rho, const Sub2DTime& c,
                    double mass_m);

/// out[i] = phi[i] + dt * A (X[i] - B x[i]) * upwind slope, for 1 <= i < n-1.
/// out[0] and out[n-1] are left untouched. Returns the largest |c|/Δx.
double upwind_transport(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> phi, std::span<const double> X,
                        double A, double B, double dt, std::span<double> out);

/// max over interior nodes of |A (X - B x)| / Δx_upwind.
double upwind_max_speed(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> X, double A, double B);

/// Implicit transport-diffusion coefficients (see closed_forms.hpp) for
/// 1 <= i < n-1; entries 0 and n-1 are left untouched.
void hybrid_coefficients(std::span<const double> x, std::span<const double> inv_h,
                         std::span<const double> diff_lower,
                         std::span<const double> diff_upper,
                         std::span<const double> X, double A, double B,
                         std::span<double> lower, std::span<double> upper);

// Backend-specific entry points, exposed for equivalence tests.
namespace scalar {
ResidualRowMax residual_row_4d(std::span<const double> s, const Sub4DTime& c,
                               double mu_star, double delta);
double theta_row_2d(std::span<const double> rho, const Sub2DTime& c, double mass_m);
double upwind_transport(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> phi, std::span<const double> X,
                        double A, double B, double dt, std::span<double> out);
double upwind_max_speed(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> X, double A, double B);
void hybrid_coefficients(std::span<const double> x, std::span<const double> inv_h,
                         std::span<const double> diff_lower,
                         std::span<const double> diff_upper,
                         std::span<const double> X, double A, double B,
                         std::span<double> lower, std::span<double> upper);
}  // namespace scalar

namespace avx2 {
bool compiled();
ResidualRowMax residual_row_4d(std::span<const double> s, const Sub4DTime& c,
                               double mu_star, double delta);
double theta_row_2d(std::span<const double> rho, const Sub2DTime& c, double mass_m);
double upwind_transport(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> phi, std::span<const double> X,
                        double A, double B, double dt, std::span<double> out);
double upwind_max_speed(std::span<const double> x, std::span<const double> inv_h,
                        std::span<const double> X, double A, double B);
void hybrid_coefficients(std::span<const double> x, std::span<const double> inv_h,
                         std::span<const double> diff_lower,
                         std::span<const double> diff_upper,
                         std::span<const double> X, double A, double B,
                         std::span<double> lower, std::span<double> upper);
}  // namespace avx2

}  // namespace collapse::simd
