#pragma once

// Exploding subsolutions of the transformed systems: parameter selection,
// closed-form evaluation, grid certificates of the residual signs, the
// stationary families they perturb, and admissible initial data.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collapse/closed_forms.hpp"
#include "collapse/radial_model.hpp"

namespace collapse {

// ---------------------------------------------------------------------------
// Parameter selection

/// Root of e^{(γ+1)ξ}(1+3ξ³) = m/(64π²) by bisection on [1e-12, 10].
double solve_eps0(double gamma, double mass_m);

/// Builds the 4D constants from (δ, m, κ). Throws InputError unless
/// δ > 0, κ > 0 and m > 64π².
Params4D select_parameters_4d(double delta, double mass_m, double kappa);
/// ε = min{1/2, ln((m+8π)/16π), 16(3+m/π)^{-2}}, ℓ = ε. Needs m > 8π.
Params2D select_parameters_2d(double mass_m);

// ---------------------------------------------------------------------------
// Closed forms

struct SubsolutionPoint4D {
  Jet<double> u;
  Jet<double> w;
};

class SubsolutionPair4D {
 public:
  explicit SubsolutionPair4D(const Params4D& params) : params_(params) {}

  const Params4D& params() const { return params_; }
  double t_star() const { return params_.t_star; }
  Sub4DTime time_scalars(double t) const {
    return Sub4DTime::at(params_.eps, params_.ell, params_.gamma, t);
  }

  /// Values and analytic partials. Throws InputError for t >= T★ or s
  /// outside [0,1]. At s = 0 the values vanish and the partials are the
  /// one-sided limits (second derivatives are reported as 0).
  SubsolutionPoint4D eval(double s, double t) const;
  double u(double s, double t) const;
  double w(double s, double t) const;

 private:
  Params4D params_;
};

class Subsolution2D {
 public:
  explicit Subsolution2D(const Params2D& params) : params_(params) {}

  const Params2D& params() const { return params_; }
  double t_star() const { return params_.t_star; }
  Sub2DTime time_scalars(double t) const {
    return Sub2DTime::at(params_.eps, params_.ell, t);
  }

  Jet<double> eval(double rho, double t) const;
  double u(double rho, double t) const;

 private:
  Params2D params_;
};

/// Same as SubsolutionPair4D::eval; named entry point for callers that think
/// in terms of operations rather than objects.
inline SubsolutionPoint4D eval_subsolution_4d(const SubsolutionPair4D& pair,
                                              double s, double t) {
  return pair.eval(s, t);
}

// ---------------------------------------------------------------------------
// Stationary families

/// Scaled steady states: X_λ, Y_λ, their cumulative masses ℒX_λ, ℒY_λ in 4D,
/// and V_0, F_λ in 2D. Throws InputError for λ <= 0.
class StationaryFamily {
 public:
  explicit StationaryFamily(double lambda);

  double lambda() const { return lambda_; }

  double X(double r) const;  // λ⁴ X_0(λr), X_0 = 2^7·3/(1+r²)^4
  double Y(double r) const;  // λ² Y_0(λr), Y_0 = 16(2+r²)/(1+r²)²
  double Z(double r) const;  // log X_λ
  Jet<double> LX(double s) const;  // ℒX_λ(s) with s-derivatives
  Jet<double> LY(double s) const;  // ℒY_λ(s)
  Jet<double> F(double rho) const;  // F_λ(ρ) = 4ρ/(ρ+λ²) with ρ-derivatives

  static double V0(double r) { return 8.0 / ((1.0 + r * r) * (1.0 + r * r)); }

 private:
  double lambda_;
  double inv_l2_;  // λ^{-2}
};

/// 16 s^{3/2} Φ_ss + 4 Φ_s Ψ and 16 s^{3/2} Ψ_ss + Φ for (Φ,Ψ) = (ℒX_λ, ℒY_λ).
struct StationaryResidual {
  double first = 0.0;
  double second = 0.0;
  double scale = 0.0;  // largest term magnitude
};
StationaryResidual stationary_residual_4d(const StationaryFamily& fam, double s);
/// 4ρF'' + 2FF' with the magnitude of its terms.
StationaryResidual stationary_residual_2d(const StationaryFamily& fam, double rho);

// ---------------------------------------------------------------------------
// Certificates

struct CertificateCheck {
  std::string name;
  double value = 0.0;  // residual maximum or slack
  bool pass = false;
};

struct Certificate {
  int grid_n = 0;
  int time_n = 0;
  double tolerance = 0.0;
  /// Largest raw residual and largest residual divided by max(1,|a(t)|).
  double max_residual_P = -1e300;
  double max_scaled_P = -1e300;
  double max_residual_Q = -1e300;
  double max_scaled_Q = -1e300;
  std::vector<CertificateCheck> checks;
  bool pass = false;

  /// CSV with columns check_name,max_residual_or_slack,grid_n,verdict.
  std::string to_csv() const;
  const CertificateCheck* find(const std::string& name) const;
};

struct CertificateOptions {
  int grid_n = 2048;      // s (or ρ) nodes: interior nodes of Grid(grid_n)
  int time_n = 2048;      // time samples on [0, T★(1 - 1e-9)]
  int g_samples = 10000;  // samples of g(t) >= 1 + ε³
  double tolerance = 1e-12;
  int threads = 0;        // 0: hardware concurrency
};

Certificate certify_subsolution_4d(const SubsolutionPair4D& pair,
                                   const CertificateOptions& options = {});
Certificate certify_subsolution_2d(const Subsolution2D& sub,
                                   const CertificateOptions& options = {});

// ---------------------------------------------------------------------------
// Initial data

class EnvelopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smallest-effort θ with (1+θ)ξ/(θ+ξ)·target >= f(ξ) at every sample.
/// Tries θ = 1, then halves until domination holds and halves once more.
/// `xi` must be increasing, start at 0 and end at 1.
double mobius_envelope(const std::vector<double>& xi,
                       const std::vector<double>& f, double target,
                       int max_halvings = 200);

/// (1+θ)ξ/(θ+ξ)·target.
double mobius(double theta, double target, double xi);

/// Sample abscissae used for envelope searches: 0, a log-spaced sweep over
/// [1e-40, 1) and `uniform` equispaced points, merged and sorted.
std::vector<double> envelope_samples(int log_points, int uniform);

struct InitialData4D {
  RadialProfile u0;
  RadialProfile w0;
  double theta_u = 0.0;
  double theta_w = 0.0;
  double u_endpoint = 0.0;  // m/(2π²)
  double w_endpoint = 0.0;  // c_w
};

struct InitialData2D {
  RadialProfile u0;
  double theta = 0.0;
  double endpoint = 0.0;  // m/(2π)
};

/// Radially decreasing density whose cumulative mass is the Möbius envelope:
/// u(r) = factor · endpoint · (1+θ)θ/(θ + r^power)², sampled finely enough
/// near r = θ^{1/power} and renormalized so its piecewise-linear mass is exact.
RadialProfile mobius_density(double theta, double endpoint, int power,
                             int samples = 20000);

InitialData4D build_initial_data_4d(const SubsolutionPair4D& pair, double mass_m,
                                    double kappa);
InitialData2D build_initial_data_2d(const Subsolution2D& sub, double mass_m);

}  // namespace collapse
